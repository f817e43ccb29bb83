#include "halpern/drivers.hpp"

#include "halpern/errors.hpp"

#include <chrono>
#include <cmath>

namespace halpern {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool wall_exceeded(double elapsed, double limit) {
  return limit > 0.0 && std::isfinite(limit) && elapsed >= limit;
}

}  // namespace

Instance Instance::from_bodies(std::vector<ConvexBody> bodies, Point anchor) {
  if (bodies.empty()) throw InputError("instance needs at least one body");
  Instance inst;
  inst.n = anchor.size();
  for (const auto& b : bodies) {
    if (b.dim() != inst.n) throw InputError("instance bodies and anchor differ in dimension");
  }
  inst.m = static_cast<Index>(bodies.size());
  inst.bodies = std::move(bodies);
  inst.anchor = std::move(anchor);
  return inst;
}

void StopRule::validate() const {
  const bool iters_finite = max_iters > 0;
  const bool wall_finite = wall_limit > 0.0 && std::isfinite(wall_limit);
  const bool target_finite = stop_on_target && (err_tol > 0.0 || feas_tol > 0.0);
  if (!iters_finite && !wall_finite && !target_finite) {
    throw InputError("stop rule has no finite bound");
  }
  if (err_tol < 0.0 || feas_tol < 0.0) throw InputError("stop rule tolerances must be >= 0");
}

std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "CONVERGED";
    case SolveStatus::IterLimit: return "ITER_LIMIT";
    case SolveStatus::TimeLimit: return "TIME_LIMIT";
    case SolveStatus::Error: return "ERROR";
  }
  return "?";
}

bool keep_iterate(long k) {
  if (k <= 10000) return true;
  const long every = (k + 999) / 1000;
  return k % every == 0;
}

namespace {

// Shared bookkeeping for the Halpern and Dykstra loops.
class Recorder {
 public:
  Recorder(const StopRule& stop, const TraceOptions& opt, std::function<double(const Point&)> delta,
           std::optional<Point> target)
      : stop_(stop), opt_(opt), delta_(std::move(delta)), target_(std::move(target)) {
    err_mode_ = target_.has_value() && !stop_.force_feasibility_mode;
    if (!err_mode_ && !delta_) throw InputError("feasibility stopping needs a delta function");
  }

  // Returns true when the iterate meets the stopping target.
  bool observe(long k, const Point& x, double alpha, double time_s, const OperatorEvaluation* ev) {
    const bool record = opt_.enabled && (k == 0 || k % std::max(1L, opt_.scalar_every) == 0);
    TraceRow row;
    row.k = k;
    row.alpha = alpha;
    row.time_s = time_s;
    if (target_) row.err = (x - *target_).norm();
    bool hit = false;
    if (stop_.stop_on_target) {
      if (err_mode_) {
        hit = row.err <= stop_.err_tol;
      } else {
        row.delta = delta_(x);
        hit = row.delta <= stop_.feas_tol;
      }
    }
    if (ev) {
      if (ev->measured_epsilon) row.eps_hat = *ev->measured_epsilon;
      row.degenerate = ev->degenerate_circumcenter;
      any_degenerate_ = any_degenerate_ || ev->degenerate_circumcenter;
    }
    if (record || hit) {
      if (opt_.record_delta && delta_ && std::isnan(row.delta)) row.delta = delta_(x);
      trace_.rows.push_back(row);
      if (opt_.store_iterates && keep_iterate(k)) trace_.iterates.push_back({k, x});
    }
    last_row_ = row;
    return hit;
  }

  // Appends the final row if thinning skipped it, then fills the report.
  void finish(SolveReport& rep, const Point& x, long k) {
    rep.iterations = k;
    rep.final_point = x;
    if (target_) rep.final_err = (x - *target_).norm();
    if (delta_) {
      try {
        rep.final_delta = delta_(x);
      } catch (const std::exception&) {
        rep.final_delta = std::numeric_limits<double>::quiet_NaN();
      }
    }
    rep.degenerate_circumcenter = any_degenerate_;
    if (opt_.enabled && (trace_.rows.empty() || trace_.rows.back().k != k) && last_row_.k == k) {
      TraceRow row = last_row_;
      row.delta = rep.final_delta;
      trace_.rows.push_back(row);
      if (opt_.store_iterates) trace_.iterates.push_back({k, x});
    } else if (opt_.enabled && !trace_.rows.empty() && trace_.rows.back().k == k) {
      trace_.rows.back().delta = rep.final_delta;
    }
  }

  IterationTrace take_trace() { return std::move(trace_); }

 private:
  const StopRule& stop_;
  const TraceOptions& opt_;
  std::function<double(const Point&)> delta_;
  std::optional<Point> target_;
  bool err_mode_ = false;
  bool any_degenerate_ = false;
  TraceRow last_row_;
  IterationTrace trace_;
};

}  // namespace

SolveResult halpern_iterate(const HalpernProblem& problem, const StopRule& stop,
                            const TraceOptions& trace) {
  return halpern_iterate_extracted(problem, stop, trace, {});
}

SolveResult halpern_iterate_extracted(const HalpernProblem& problem, const StopRule& stop,
                                      const TraceOptions& trace,
                                      const std::function<Point(const Point&)>& extract) {
  stop.validate();
  if (!problem.apply || !problem.alpha) throw InputError("halpern_iterate: operator and alpha rule required");
  const auto t0 = Clock::now();
  const auto view = [&](const Point& z) { return extract ? extract(z) : z; };

  SolveResult out;
  SolveReport& rep = out.report;
  rep.method = problem.method;
  rep.schedule = problem.schedule;

  Recorder rec(stop, trace, problem.delta, problem.target);
  Point x = problem.anchor;
  long k = 0;
  Point shown = view(x);
  try {
    if (rec.observe(0, shown, std::numeric_limits<double>::quiet_NaN(), seconds_since(t0), nullptr)) {
      rep.status = SolveStatus::Converged;
    } else {
      rep.status = SolveStatus::IterLimit;
      while (k < stop.max_iters || stop.max_iters <= 0) {
        const OperatorEvaluation ev = problem.apply(x);
        ++k;
        const double a = problem.alpha(k);
        x = a * problem.anchor + (1.0 - a) * ev.output;
        shown = view(x);
        const double elapsed = seconds_since(t0);
        if (rec.observe(k, shown, a, elapsed, &ev)) {
          rep.status = SolveStatus::Converged;
          break;
        }
        if (wall_exceeded(elapsed, stop.wall_limit)) {
          rep.status = SolveStatus::TimeLimit;
          break;
        }
      }
    }
  } catch (const std::exception& e) {
    rep.status = SolveStatus::Error;
    rep.message = e.what();
  }
  rec.finish(rep, shown, k);
  rep.wall_time_s = seconds_since(t0);
  out.trace = rec.take_trace();
  return out;
}

SolveResult halpern_solve(const Instance& instance, OperatorKind kind, const StepSchedule& schedule,
                          const StopRule& stop, const SolveOptions& options) {
  if (instance.bodies.empty()) throw InputError("halpern_solve: instance has no bodies");
  const std::span<const ConvexBody> bodies(instance.bodies);
  const std::size_t m = instance.bodies.size();

  HalpernProblem prob;
  prob.method = "halpern_" + std::string(to_string(kind));
  prob.schedule = schedule.label();
  prob.alpha = [schedule](long k) { return schedule_alpha(schedule, k); };
  prob.delta = [bodies, tol = options.op.tol](const Point& x) { return violation_delta(bodies, x, tol); };
  if (instance.reference) prob.target = instance.reference->point;

  std::function<Point(const Point&)> extract;
  if (kind == OperatorKind::CrmProduct) {
    prob.anchor = embed_diagonal(instance.anchor, m);
    extract = [m](const Point& z) { return block_average(z, m); };
  } else {
    prob.anchor = instance.anchor;
  }
  const OperatorOptions op = options.op;
  prob.apply = [kind, bodies, op](const Point& x) { return apply_operator(kind, bodies, x, op); };

  SolveResult res = halpern_iterate_extracted(prob, stop, options.trace, extract);
  res.report.m = instance.m;
  res.report.n = instance.n;
  res.report.k = instance.k;
  return res;
}

SolveResult dykstra_solve(const Instance& instance, const StopRule& stop, const SolveOptions& options) {
  stop.validate();
  if (instance.bodies.empty()) throw InputError("dykstra_solve: instance has no bodies");
  const auto t0 = Clock::now();
  const std::span<const ConvexBody> bodies(instance.bodies);
  const std::size_t m = bodies.size();
  const double tol = options.op.tol;

  SolveResult out;
  SolveReport& rep = out.report;
  rep.method = "dykstra";
  rep.schedule = "none";
  rep.m = instance.m;
  rep.n = instance.n;
  rep.k = instance.k;

  std::optional<Point> target;
  if (instance.reference) target = instance.reference->point;
  Recorder rec(stop, options.trace,
               [bodies, tol](const Point& x) { return violation_delta(bodies, x, tol); }, target);

  Point x = instance.anchor;
  std::vector<Point> y(m, Point::Zero(x.size()));
  long k = 0;
  try {
    if (rec.observe(0, x, std::numeric_limits<double>::quiet_NaN(), seconds_since(t0), nullptr)) {
      rep.status = SolveStatus::Converged;
    } else {
      rep.status = SolveStatus::IterLimit;
      while (k < stop.max_iters || stop.max_iters <= 0) {
        for (std::size_t i = 0; i < m; ++i) {
          const Point shifted = x - y[i];
          x = project(bodies[i], shifted, tol);
          y[i] = x - shifted;
        }
        ++k;
        const double elapsed = seconds_since(t0);
        if (rec.observe(k, x, std::numeric_limits<double>::quiet_NaN(), elapsed, nullptr)) {
          rep.status = SolveStatus::Converged;
          break;
        }
        if (wall_exceeded(elapsed, stop.wall_limit)) {
          rep.status = SolveStatus::TimeLimit;
          break;
        }
      }
    }
  } catch (const std::exception& e) {
    rep.status = SolveStatus::Error;
    rep.message = e.what();
  }
  rec.finish(rep, x, k);
  rep.wall_time_s = seconds_since(t0);
  out.trace = rec.take_trace();
  return out;
}

DykstraOracleResult dykstra_to_tolerance(std::span<const ConvexBody> bodies, const Point& anchor,
                                         double feas_tol, double move_tol, long max_cycles,
                                         double wall_limit) {
  if (bodies.empty()) throw InputError("dykstra_to_tolerance: no bodies");
  const auto t0 = Clock::now();
  const std::size_t m = bodies.size();
  DykstraOracleResult out;
  Point x = anchor;
  std::vector<Point> y(m, Point::Zero(x.size()));
  for (long k = 1; k <= max_cycles; ++k) {
    // x can sit still for many cycles while the corrections are still being
    // rebalanced, so both must settle before the answer is trusted.
    const Point prev = x;
    double correction_move = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const Point shifted = x - y[i];
      x = project(bodies[i], shifted);
      const Point yi = x - shifted;
      correction_move = std::max(correction_move, (yi - y[i]).norm());
      y[i] = yi;
    }
    out.iterations = k;
    out.movement = std::max((x - prev).norm(), correction_move);
    if (out.movement <= move_tol) {
      out.delta = violation_delta(bodies, x);
      if (out.delta <= feas_tol) {
        out.converged = true;
        break;
      }
    }
    if ((k & 63) == 0 && wall_exceeded(seconds_since(t0), wall_limit)) break;
  }
  if (!out.converged) out.delta = violation_delta(bodies, x);
  out.point = std::move(x);
  return out;
}

}  // namespace halpern
