#pragma once

#include "halpern/geometry.hpp"

namespace halpern {

struct NnlsResult {
  Vector solution;
  double residual_norm = 0.0;
  int iterations = 0;
};

/// Lawson-Hanson active-set solver for min ||E u - f|| subject to u >= 0.
/// Throws SolverError when the iteration cap is exceeded.
NnlsResult nnls(const Matrix& E, const Vector& f, int max_iterations = 0);

/// Exact projection onto {y : A y <= b} with KKT diagnostics.
struct PolyhedralProjection {
  Point point;
  Vector multipliers;          // one per row of A, in the units of the raw rows
  double feasibility = 0.0;    // max_j (a_j^T y - b_j) / |a_j|, clipped at 0
  double min_multiplier = 0.0;
  double complementarity = 0.0;  // max_j |mu_j (a_j^T y - b_j)|
  int iterations = 0;
};

/// Solves min 1/2 |y - x|^2 s.t. A y <= b through its least-distance dual:
/// the multipliers come from an NNLS active-set solve, and the answer is
/// certified against feasibility, dual sign and complementary slackness at
/// `tol` (scaled by the violation magnitude). Empty feasible sets raise
/// InstanceError; certification failures raise SolverError.
PolyhedralProjection project_onto_rows(const Matrix& A, const Vector& b, const Point& x,
                                       double tol = kProjectionTol);

}  // namespace halpern
