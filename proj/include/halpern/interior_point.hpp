#pragma once

#include "halpern/geometry.hpp"

#include <span>

namespace halpern {

struct InteriorPointOptions {
  int max_iterations = 200;
  double tol = 1e-12;  // relative tolerance on residuals and complementarity
};

struct InteriorPointResult {
  Point point;
  Vector multipliers;  // one per scalar constraint, in the normalized units below
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double complementarity = 0.0;
  bool converged = false;
};

/// Primal-dual interior-point solve of min 1/2 |y - x0|^2 over the intersection
/// of halfspaces, polyhedra, balls and ellipsoids.  Linear rows are normalized
/// to unit norm and quadratic constraints are divided by radius^2.  Starts from
/// y = x0 with positive slacks, so x0 need not be feasible.
InteriorPointResult interior_point_projection(std::span<const ConvexBody> bodies, const Point& x0,
                                              const InteriorPointOptions& opt = {});

}  // namespace halpern
