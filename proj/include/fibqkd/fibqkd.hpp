#pragma once

#include "fibqkd/channel.hpp"
#include "fibqkd/config.hpp"
#include "fibqkd/digest.hpp"
#include "fibqkd/errors.hpp"
#include "fibqkd/fibcode.hpp"
#include "fibqkd/harness.hpp"
#include "fibqkd/parties.hpp"
#include "fibqkd/quantum.hpp"
#include "fibqkd/rng.hpp"
#include "fibqkd/spiral.hpp"
#include "fibqkd/stats.hpp"
