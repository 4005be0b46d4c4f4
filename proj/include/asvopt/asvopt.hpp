#pragma once

#include "asvopt/barrier.hpp"
#include "asvopt/benchmark.hpp"
#include "asvopt/config.hpp"
#include "asvopt/controller.hpp"
#include "asvopt/error.hpp"
#include "asvopt/export.hpp"
#include "asvopt/harness.hpp"
#include "asvopt/solar.hpp"
#include "asvopt/vessel.hpp"
