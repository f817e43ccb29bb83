#pragma once

#include "halpern/instance.hpp"
#include "halpern/operators.hpp"
#include "halpern/schedule.hpp"

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace halpern {

struct StopRule {
  double err_tol = 1e-2;   // |x_k - s*| <= err_tol when a reference is known
  double feas_tol = 1e-6;  // delta(x_k) <= feas_tol otherwise
  long max_iters = 1'000'000;
  double wall_limit = 600.0;  // seconds; <= 0 or inf disables
  /// false: run to max_iters / wall_limit regardless of the error (rate runs).
  bool stop_on_target = true;
  /// Use the feasibility test even when a reference is available.
  bool force_feasibility_mode = false;

  void validate() const;
};

enum class SolveStatus { Converged, IterLimit, TimeLimit, Error };
std::string_view to_string(SolveStatus s);

struct TraceRow {
  long k = 0;  // operator applications so far
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double delta = std::numeric_limits<double>::quiet_NaN();
  double err = std::numeric_limits<double>::quiet_NaN();
  double time_s = 0.0;
  double eps_hat = std::numeric_limits<double>::quiet_NaN();
  bool degenerate = false;
};

struct StoredIterate {
  long k = 0;
  Point x;
};

struct IterationTrace {
  std::vector<TraceRow> rows;
  std::vector<StoredIterate> iterates;
};

struct TraceOptions {
  bool enabled = true;
  /// Record scalar rows every this many iterations (always the first and last).
  long scalar_every = 1;
  /// Keep iterates: every one up to 10^4, then every ceil(k/1000)-th.
  bool store_iterates = false;
  /// Compute delta(x_k) on recorded rows; when false it is computed only at the end
  /// or where the feasibility stop needs it.
  bool record_delta = true;
};

struct SolveOptions {
  OperatorOptions op;
  TraceOptions trace;
};

struct SolveReport {
  std::string method;
  Index m = 0, n = 0, k = 0;
  std::string schedule;
  long iterations = 0;
  double wall_time_s = 0.0;
  double final_err = std::numeric_limits<double>::quiet_NaN();
  double final_delta = std::numeric_limits<double>::quiet_NaN();
  SolveStatus status = SolveStatus::Error;
  std::string message;  // error text for status Error
  bool degenerate_circumcenter = false;
  Point final_point;
};

struct SolveResult {
  SolveReport report;
  IterationTrace trace;
};

/// Should match the "iterates kept" rule of TraceOptions::store_iterates.
bool keep_iterate(long k);

/// x_{k+1} = alpha_k x0 + (1 - alpha_k) T(x_k) for an arbitrary T.  The
/// generic core behind halpern_solve; exposed so tests can drive stub
/// operators and custom stepsizes.
using PointOperator = std::function<OperatorEvaluation(const Point&)>;
using AlphaRule = std::function<double(long)>;

struct HalpernProblem {
  PointOperator apply;
  AlphaRule alpha;
  Point anchor;
  /// delta of an iterate; required for feasibility mode and trace rows.
  std::function<double(const Point&)> delta;
  std::optional<Point> target;  // s*
  std::string method = "custom";
  std::string schedule = "custom";
};

SolveResult halpern_iterate(const HalpernProblem& problem, const StopRule& stop,
                            const TraceOptions& trace = {});

/// As above, with stopping, errors and trace rows evaluated on extract(x_k)
/// (CRM uses the block average of its product-space iterate).
SolveResult halpern_iterate_extracted(const HalpernProblem& problem, const StopRule& stop,
                                      const TraceOptions& trace,
                                      const std::function<Point(const Point&)>& extract);

/// Halpern iteration with one of the six operators.  CRM runs in R^{n m}
/// from z0 = (x0, ..., x0); reported iterates are block averages.
SolveResult halpern_solve(const Instance& instance, OperatorKind kind, const StepSchedule& schedule,
                          const StopRule& stop, const SolveOptions& options = {});

/// Dykstra's cyclic projections with corrections.  One iteration is one full
/// pass over the m sets.
SolveResult dykstra_solve(const Instance& instance, const StopRule& stop,
                          const SolveOptions& options = {});

/// Dykstra variant used by the reference oracle: stops when delta(x) <= feas_tol
/// and the cycle-to-cycle movement of the iterate and of every correction is <= move_tol.
struct DykstraOracleResult {
  Point point;
  long iterations = 0;
  double delta = 0.0;
  double movement = 0.0;
  bool converged = false;
};
DykstraOracleResult dykstra_to_tolerance(std::span<const ConvexBody> bodies, const Point& anchor,
                                         double feas_tol, double move_tol, long max_cycles,
                                         double wall_limit = 0.0);

}  // namespace halpern
