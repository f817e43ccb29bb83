#pragma once

#include "halpern/geometry.hpp"

#include <vector>

namespace halpern {

struct CircumcenterResult {
  Point center;
  double radius = 0.0;
  int rank = 0;           // affine rank of p_1 - p_0, ..., p_{q} - p_0
  double residual = 0.0;  // max_i | |center - p_i| - radius |
  bool degenerate = false;  // rank < #points - 1
};

/// Point of the affine hull of `points` equidistant from all of them.
/// Rank-deficient configurations get the minimum-norm solution of the
/// equidistance system; three distinct collinear points have no circumcenter,
/// which shows up as a large residual together with the degenerate flag.
CircumcenterResult circumcenter(const std::vector<Point>& points);

}  // namespace halpern
