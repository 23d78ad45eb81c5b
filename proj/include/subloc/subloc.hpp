#pragma once

// Umbrella header for the whole library.

#include "subloc/baselines.hpp"
#include "subloc/bicluster.hpp"
#include "subloc/cleanup.hpp"
#include "subloc/errors.hpp"
#include "subloc/harness.hpp"
#include "subloc/hermite.hpp"
#include "subloc/limits.hpp"
#include "subloc/model.hpp"
#include "subloc/mp.hpp"
#include "subloc/pipeline.hpp"
#include "subloc/rng.hpp"
#include "subloc/schedule.hpp"
#include "subloc/serialize.hpp"
#include "subloc/state_evolution.hpp"
#include "subloc/voting.hpp"
