#pragma once

#include "halpern/geometry.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace halpern {

struct ReferenceSolution {
  Point point;
  double certified_tol = 0.0;
};

/// A best approximation problem: project `anchor` onto the intersection of `bodies`.
struct Instance {
  std::string family = "custom";  // ellipsoid | polyhedron | custom
  std::vector<ConvexBody> bodies;
  Point anchor;
  Index m = 0;
  Index n = 0;
  Index k = 0;         // rows per polyhedron, 0 otherwise
  double theta = 0.0;  // ellipsoid family
  double alpha = 0.0;  // polyhedral spread
  std::uint64_t seed = 0;
  std::optional<ReferenceSolution> reference;
  /// A point of the intersection known by construction (origin, x*).
  std::optional<Point> witness;

  /// Builds a custom instance and fills m, n from the bodies.
  static Instance from_bodies(std::vector<ConvexBody> bodies, Point anchor);
};

}  // namespace halpern
