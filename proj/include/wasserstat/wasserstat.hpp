#pragma once

// Umbrella header for the wasserstat library.

#include "wasserstat/divergences.hpp"
#include "wasserstat/efficiency.hpp"
#include "wasserstat/errors.hpp"
#include "wasserstat/estimators.hpp"
#include "wasserstat/io.hpp"
#include "wasserstat/linalg.hpp"
#include "wasserstat/model.hpp"
#include "wasserstat/numeric.hpp"
#include "wasserstat/rng.hpp"
#include "wasserstat/shapes.hpp"
#include "wasserstat/version.hpp"
#include "wasserstat/wscore.hpp"
