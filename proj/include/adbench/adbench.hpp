#pragma once

// Umbrella header.

#include "adbench/ad_measures.hpp"
#include "adbench/bench.hpp"
#include "adbench/bnn.hpp"
#include "adbench/config.hpp"
#include "adbench/csv.hpp"
#include "adbench/dataset.hpp"
#include "adbench/ensemble.hpp"
#include "adbench/errors.hpp"
#include "adbench/gpr.hpp"
#include "adbench/linalg.hpp"
#include "adbench/linear_models.hpp"
#include "adbench/mlp.hpp"
#include "adbench/model_io.hpp"
#include "adbench/model_zoo.hpp"
#include "adbench/regressor.hpp"
#include "adbench/rng.hpp"
#include "adbench/stats.hpp"
#include "adbench/svg.hpp"
#include "adbench/synth.hpp"
#include "adbench/tree.hpp"
#include "adbench/validation.hpp"
