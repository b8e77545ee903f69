#pragma once

// Numerical feasibility checks and weight estimation for matching-adjusted
// indirect comparison (MAIC): convex-hull membership of the aggregate means
// in the patient-level data, PC-coordinate location diagnostics, Hotelling
// T² closeness tests, the moment-matching weight fit itself, and LP-based
// alternative weight sets.

#include "maicfeas/alt_weights.hpp"
#include "maicfeas/common.hpp"
#include "maicfeas/data.hpp"
#include "maicfeas/hotelling.hpp"
#include "maicfeas/hull.hpp"
#include "maicfeas/linalg.hpp"
#include "maicfeas/maic.hpp"
#include "maicfeas/pca.hpp"
#include "maicfeas/report.hpp"
#include "maicfeas/simplex.hpp"
#include "maicfeas/special.hpp"
#include "maicfeas/svg.hpp"
