#pragma once

// Umbrella header for the HOM two-source interference toolkit.

#include "homsim/config.hpp"
#include "homsim/counting.hpp"
#include "homsim/csv.hpp"
#include "homsim/errors.hpp"
#include "homsim/fitting.hpp"
#include "homsim/interference.hpp"
#include "homsim/rng.hpp"
#include "homsim/sources.hpp"
#include "homsim/spectral.hpp"
#include "homsim/units.hpp"
