#include "halpern/analysis.hpp"

#include "halpern/errors.hpp"
#include "halpern/interior_point.hpp"
#include "halpern/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace halpern {

void HolderParams::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw InputError("HolderParams: gamma must be in (0, 1]");
  if (!(c >= 1.0)) throw InputError("HolderParams: c must be >= 1");
}

double HolderParams::tau(double c0) const { return c0 / (2.0 * std::pow(c, 2.0 / gamma)); }

DistanceEstimate estimate_distance_to_S(const Instance& instance, const Point& x, double tol) {
  if (violation_delta(instance.bodies, x) == 0.0) return {0.0, 0.0, x};
  const ReferenceReport r = reference_projection(instance, x, tol);
  return {(x - r.point).norm(), r.certified_tol, r.point};
}

DistanceEstimate fast_distance_to_S(const Instance& instance, const Point& x) {
  if (violation_delta(instance.bodies, x) == 0.0) return {0.0, 0.0, x};
  const InteriorPointResult r = interior_point_projection(instance.bodies, x);
  if (!r.converged) throw OracleError("fast_distance_to_S: interior-point solve did not converge");
  return {(x - r.point).norm(), r.primal_residual, r.point};
}

RateSeries err_series(const IterationTrace& trace) {
  RateSeries s;
  for (const auto& row : trace.rows) {
    if (row.k >= 1 && std::isfinite(row.err) && std::isfinite(row.alpha)) s.push(row.k, row.alpha, row.err);
  }
  return s;
}

RateEstimate fit_rate(const RateSeries& series, double exponent, double tail_fraction) {
  if (!(exponent > 0.0)) throw InputError("fit_rate: exponent must be > 0");
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) throw InputError("fit_rate: tail_fraction must be in (0, 1]");
  if (series.size() < 2) throw InputError("fit_rate: need at least two points");
  RateEstimate est;
  est.exponent = exponent;
  const long kmax = series.k.back();
  const long kstart = static_cast<long>(std::ceil((1.0 - tail_fraction) * static_cast<double>(kmax)));
  est.k1 = std::max(kstart, series.k.front());
  est.k2 = kmax;

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t cnt = 0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series.k[i] < est.k1) continue;
    const double v = series.value[i];
    est.tail_sup = std::max(est.tail_sup, v / std::pow(series.alpha[i], exponent));
    if (v > 0.0) {
      const double lx = std::log(series.alpha[i]);
      const double ly = std::log(v);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
      ++cnt;
    }
  }
  if (cnt >= 2) {
    const double nd = static_cast<double>(cnt);
    const double var = sxx - sx * sx / nd;
    if (var > 0.0) est.slope = (sxy - sx * sy / nd) / var;
  }
  return est;
}

std::vector<double> doubling_window_sups(const RateSeries& series, double exponent, int windows) {
  if (series.size() == 0 || windows < 1) throw InputError("doubling_window_sups: empty input");
  const double kmax = static_cast<double>(series.k.back());
  std::vector<double> sups(static_cast<std::size_t>(windows), 0.0);
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double k = static_cast<double>(series.k[i]);
    const int j = static_cast<int>(std::floor(std::log2(kmax / k)));
    const bool upper_edge = k * std::exp2(j) == kmax && j > 0;
    const int w = upper_edge ? j - 1 : j;
    if (w < 0 || w >= windows) continue;
    sups[static_cast<std::size_t>(w)] =
        std::max(sups[static_cast<std::size_t>(w)], series.value[i] / std::pow(series.alpha[i], exponent));
  }
  return sups;
}

OrderRecReport check_orderrec(double M, double tau, double lambda, const StepSchedule& schedule,
                              long horizon, double beta1) {
  if (!(M > 0.0)) throw InputError("check_orderrec: M must be > 0");
  if (!(tau > 0.0 && tau <= 1.0)) throw InputError("check_orderrec: tau must be in (0, 1]");
  if (!(lambda >= 0.0)) throw InputError("check_orderrec: lambda must be >= 0");
  if (horizon < 1000) throw InputError("check_orderrec: horizon must be >= 1000");
  if (!(beta1 >= 0.0)) throw InputError("check_orderrec: beta1 must be >= 0");

  OrderRecReport rep;
  const double p = 1.0 / (1.0 + lambda);
  rep.limit = std::pow(M / tau, p);
  rep.tail_ratio_inf = std::numeric_limits<double>::infinity();
  rep.max_excess_over_shifted_extremal = -std::numeric_limits<double>::infinity();

  double beta = beta1;
  double alpha_prev = std::numeric_limits<double>::quiet_NaN();
  for (long k = 1; k <= horizon; ++k) {
    const double a = schedule_alpha(schedule, k);
    const double ext = rep.limit * std::pow(a, p);
    const double drift = a * M - tau * std::pow(ext, 1.0 + lambda);
    rep.extremal_max_rel_drift = std::max(rep.extremal_max_rel_drift, std::abs(drift) / (a * M));
    if (k < horizon) {
      const double ext_next = rep.limit * std::pow(schedule_alpha(schedule, k + 1), p);
      if (ext_next > ext + drift + 1e-15 * ext) rep.extremal_satisfies_recursion = false;
    }

    if (k >= 2) {
      rep.max_excess_over_shifted_extremal =
          std::max(rep.max_excess_over_shifted_extremal, beta - rep.limit * std::pow(alpha_prev, p));
    }
    if (k >= horizon / 2) {
      const double ratio = beta / std::pow(a, p);
      rep.tail_ratio_sup = std::max(rep.tail_ratio_sup, ratio);
      rep.tail_ratio_inf = std::min(rep.tail_ratio_inf, ratio);
      rep.final_ratio = ratio;
    }
    const double contraction = std::max(0.0, 1.0 - tau * std::pow(beta, lambda));
    beta = a * M + beta * contraction;
    alpha_prev = a;
  }
  rep.pass = rep.extremal_max_rel_drift <= 1e-12 && rep.extremal_satisfies_recursion &&
             rep.tail_ratio_sup <= rep.limit * (1.0 + 1e-3);
  return rep;
}

TheoremBounds theorem_bounds(const HolderParams& params, double c0, double d0, const StepSchedule& schedule) {
  params.validate();
  if (!(c0 > 0.0 && c0 <= 1.0)) throw InputError("theorem_bounds: c0 must be in (0, 1]");
  if (!(d0 >= 0.0)) throw InputError("theorem_bounds: d0 must be >= 0");
  const double g = params.gamma;
  const double c = params.c;
  TheoremBounds b;
  b.p = params.p();
  b.L = reciprocal_gap_limit(schedule);
  b.thm33 = std::pow(2.0 * std::pow(c, 2.0 / g) * d0 / c0, g / (2.0 - g));
  if (b.p * b.L < 2.0) {
    b.thm34 = std::pow(c0, -g / (4.0 - 2.0 * g)) * std::pow(2.0 - b.p * b.L, -0.5) *
              std::pow(2.0 * c * d0, 1.0 / (2.0 - g));
  }
  b.complexity_exponent = 4.0 / g - 2.0;
  b.mu_star = 2.0 - g;
  return b;
}

std::optional<double> TheoremBounds::iterations_for(double eps_target, const StepSchedule& s) const {
  if (!thm34) return std::nullopt;
  if (!(eps_target > 0.0)) throw InputError("iterations_for: eps_target must be > 0");
  if (*thm34 <= eps_target) return 1.0;
  // |x_k - P_S x| <~ C alpha_k^q with q = 1 / complexity_exponent.
  const double alpha_needed = std::pow(eps_target / *thm34, complexity_exponent);
  switch (s.kind) {
    case StepSchedule::Kind::InvK: return 1.0 / alpha_needed;
    case StepSchedule::Kind::InvSqrtK: return 1.0 / (alpha_needed * alpha_needed);
    case StepSchedule::Kind::Harmonic: return 1.0 / (s.mu * alpha_needed);
  }
  return std::nullopt;
}

namespace {

struct Sample {
  Point z;
  double delta;
  double dist;
};

std::vector<Sample> sample_near_S(const Instance& instance, const ProbeOptions& opt) {
  if (opt.samples < 2) throw InputError("probe: need at least 2 samples");
  if (!(opt.min_radius > 0.0 && opt.max_radius > opt.min_radius)) throw InputError("probe: bad radius range");
  std::vector<Point> bases = opt.base_points;
  if (bases.empty()) {
    if (instance.reference) {
      bases.push_back(instance.reference->point);
    } else {
      bases.push_back(fast_distance_to_S(instance, instance.anchor).projection);
    }
  }
  const Index n = instance.n;
  CounterRng rng(opt.seed);
  const double lo = std::log(opt.min_radius);
  const double hi = std::log(opt.max_radius);
  std::vector<Sample> out;
  const std::size_t max_tries = 50 * opt.samples;
  for (std::size_t t = 0; t < max_tries && out.size() < opt.samples; ++t) {
    const Point& s = bases[t % bases.size()];
    Vector u(n);
    for (Index j = 0; j < n; ++j) u(j) = rng.uniform(-1.0, 1.0);
    if (!(u.norm() > 0.0)) continue;
    const double r = std::exp(rng.uniform(lo, hi));
    const Point z = s + (r / u.norm()) * u;
    const double delta = violation_delta(instance.bodies, z);
    if (!(delta > 1e-12)) continue;
    const double dist = fast_distance_to_S(instance, z).distance;
    out.push_back({z, delta, dist});
  }
  if (out.empty()) throw InputError("probe: every sample was feasible");
  return out;
}

}  // namespace

GammaProbe probe_gamma(const Instance& instance, const ProbeOptions& opt) {
  const std::vector<Sample> samples = sample_near_S(instance, opt);
  GammaProbe g;
  g.samples = samples.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& s : samples) {
    const double lx = std::log(s.delta);
    const double ly = std::log(std::max(s.dist, s.delta));
    g.log_delta.push_back(lx);
    g.log_dist.push_back(ly);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double nd = static_cast<double>(samples.size());
  const double var = sxx - sx * sx / nd;
  if (!(var > 0.0)) throw InputError("probe_gamma: samples have no spread in delta");
  g.raw_slope = (sxy - sx * sy / nd) / var;
  g.gamma_hat = std::clamp(g.raw_slope, 1e-6, 1.0);
  double c = 1.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    c = std::max(c, std::exp(g.log_dist[i] - g.gamma_hat * g.log_delta[i]));
  }
  g.c_hat = c;
  return g;
}

ContractionReport contraction_certificate(const Instance& instance, OperatorKind kind,
                                          const HolderParams& params, const ProbeOptions& opt) {
  params.validate();
  const std::vector<Sample> samples = sample_near_S(instance, opt);
  const std::size_t m = instance.bodies.size();
  const double lambda = params.lambda();
  ContractionReport rep;
  rep.worst_margin = std::numeric_limits<double>::infinity();
  OperatorOptions op;
  op.measure_epsilon = kind == OperatorKind::A3pm;
  for (const auto& s : samples) {
    if (s.dist > opt.max_radius) continue;
    Point tx;
    double eps = 0.0;
    if (kind == OperatorKind::CrmProduct) {
      tx = block_average(apply_crm_product(instance.bodies, embed_diagonal(s.z, m), op).output, m);
    } else {
      const OperatorEvaluation ev = apply_operator(kind, instance.bodies, s.z, op);
      tx = ev.output;
      eps = ev.measured_epsilon.value_or(0.0);
    }
    const double tau = params.tau(decrease_constant(kind, m, eps));
    const double dtx = fast_distance_to_S(instance, tx).distance;
    const double margin = s.dist * (1.0 - tau * std::pow(s.dist, lambda)) + 1e-6 - dtx;
    rep.worst_margin = std::min(rep.worst_margin, margin);
    ++rep.samples;
  }
  rep.pass = rep.samples > 0 && rep.worst_margin >= 0.0;
  return rep;
}

}  // namespace halpern
