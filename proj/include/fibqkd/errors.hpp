#pragma once

#include <stdexcept>
#include <string>

namespace fibqkd {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration: bad sizes, probabilities, unknown keys, aliasing.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A value outside the domain of an operation (non-Fibonacci input, etc.).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A precondition the caller was responsible for did not hold.
class ContractViolation : public Error {
public:
    using Error::Error;
};

} // namespace fibqkd
