#pragma once

#include "snls/errors.hpp"
#include "snls/estimators.hpp"
#include "snls/field.hpp"
#include "snls/fit.hpp"
#include "snls/grid.hpp"
#include "snls/io.hpp"
#include "snls/noise.hpp"
#include "snls/norms.hpp"
#include "snls/parallel.hpp"
#include "snls/presets.hpp"
#include "snls/propagator.hpp"
#include "snls/randomization.hpp"
#include "snls/rng.hpp"
#include "snls/solver.hpp"
