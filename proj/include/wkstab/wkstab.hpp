#pragma once

// Umbrella header: weighted K-stability of polarized toric varieties from
// moment-polytope data.

#include "wkstab/affine.hpp"
#include "wkstab/errors.hpp"
#include "wkstab/extremal.hpp"
#include "wkstab/filtration.hpp"
#include "wkstab/json_io.hpp"
#include "wkstab/pl_function.hpp"
#include "wkstab/polynomial.hpp"
#include "wkstab/polytope.hpp"
#include "wkstab/quadrature.hpp"
#include "wkstab/rational.hpp"
#include "wkstab/simplex_lp.hpp"
#include "wkstab/stability.hpp"
#include "wkstab/toolkit.hpp"
#include "wkstab/triangulation.hpp"
