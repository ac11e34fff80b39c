#include "fibqkd/cli.hpp"

int main(int argc, char** argv) { return fibqkd::cli::run_cli(argc, argv); }
