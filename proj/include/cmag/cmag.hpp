#pragma once
// Umbrella header for the full library.

#include "cmag/compiler.hpp"
#include "cmag/config_io.hpp"
#include "cmag/core.hpp"
#include "cmag/dynamics.hpp"
#include "cmag/experiment.hpp"
#include "cmag/governance.hpp"
#include "cmag/llm.hpp"
#include "cmag/metrics.hpp"
#include "cmag/netgen.hpp"
#include "cmag/population.hpp"
#include "cmag/rng.hpp"
#include "cmag/stats.hpp"
