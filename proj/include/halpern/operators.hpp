#pragma once

#include "halpern/geometry.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace halpern {

enum class OperatorKind { Map, Cimmino, ThreePm, A3pm, Sccrm, CrmProduct };

std::string_view to_string(OperatorKind kind);
/// Accepts map, cimmino, 3pm, a3pm, sccrm, crm (case-insensitive).
OperatorKind parse_operator_kind(std::string_view name);

struct OperatorOptions {
  /// Workers for the independent per-set projections (Cimmino, 3PM, A3PM,
  /// CRM).  The combine step always runs in ascending set order.
  int threads = 1;
  double tol = kProjectionTol;
  /// A3PM: compute dist(p_hat, U_i) / dist(x, U_i).  Costs one exact
  /// projection per violated set.
  bool measure_epsilon = false;
  /// SCCRM pairs (r, l), zero-based, applied in order as T_{U_r, U_l}.
  /// Empty means (1,0), (2,1), ..., (m-1, m-2).
  std::vector<std::pair<std::size_t, std::size_t>> sccrm_pairs;
};

struct OperatorEvaluation {
  Point output;
  std::vector<Point> per_set_projections;
  std::optional<double> measured_epsilon;
  /// Set when a circumcenter step met three distinct collinear points, where
  /// no equidistant point exists and the minimum-norm fallback was used.
  bool degenerate_circumcenter = false;
};

OperatorEvaluation apply_map(std::span<const ConvexBody> bodies, const Point& x,
                             const OperatorOptions& opt = {});
OperatorEvaluation apply_cimmino(std::span<const ConvexBody> bodies, const Point& x,
                                 const OperatorOptions& opt = {});
OperatorEvaluation apply_3pm(std::span<const ConvexBody> bodies, const Point& x,
                             const OperatorOptions& opt = {});
OperatorEvaluation apply_a3pm(std::span<const ConvexBody> bodies, const Point& x,
                              const OperatorOptions& opt = {});
OperatorEvaluation apply_sccrm_cycle(std::span<const ConvexBody> bodies, const Point& x,
                                     const OperatorOptions& opt = {});
/// `z` lives in R^{n m} and must be diagonal.  The output is snapped onto the
/// diagonal after verifying it is within 1e-8 of it.
OperatorEvaluation apply_crm_product(std::span<const ConvexBody> bodies, const Point& z,
                                     const OperatorOptions& opt = {});

/// Dispatch on kind.  For CrmProduct, `x` is the product-space point.
OperatorEvaluation apply_operator(OperatorKind kind, std::span<const ConvexBody> bodies,
                                  const Point& x, const OperatorOptions& opt = {});

/// Two-set CRM-type step T_{A,B} used by SCCRM.
Point sccrm_pair_step(const ConvexBody& a, const ConvexBody& b, const Point& x, double tol,
                      bool* degenerate = nullptr);

/// (x, ..., x) in R^{n m}
Point embed_diagonal(const Point& x, std::size_t copies);
/// Block average of z in R^{n m}.
Point block_average(const Point& z, std::size_t copies);
/// max_i |z_i - block_average(z)|_inf
double diagonal_defect(const Point& z, std::size_t copies);

/// Decrease constant: 1/m for MAP, Cimmino, SCCRM; 1 for 3PM and CRM;
/// (1 - eps)^4 for A3PM.
double decrease_constant(OperatorKind kind, std::size_t m, double measured_epsilon = 0.0);

/// |x - s|^2 - |Tx - s|^2 - c0 delta(x)^2.  For CrmProduct, x and s are points
/// of R^n; they are embedded on the diagonal and the inequality is evaluated
/// in the product space against delta = dist(z, U_1 x ... x U_m).
double check_decrease(OperatorKind kind, std::span<const ConvexBody> bodies, const Point& x,
                      const Point& s, double tol = 1e-9, const OperatorOptions& opt = {});

}  // namespace halpern
