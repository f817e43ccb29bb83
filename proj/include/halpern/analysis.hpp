#pragma once

#include "halpern/drivers.hpp"
#include "halpern/instances.hpp"
#include "halpern/operators.hpp"
#include "halpern/schedule.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace halpern {

/// Holder error bound dist(z, S) <= c delta(z)^gamma.
struct HolderParams {
  double gamma = 1.0;
  double c = 1.0;

  void validate() const;
  double lambda() const { return 2.0 * (1.0 / gamma - 1.0); }
  double p() const { return gamma / (2.0 - gamma); }
  /// c0 / (2 c^{2/gamma}); in (0, 1] whenever c0 <= 1 and c >= 1.
  double tau(double c0) const;
};

struct DistanceEstimate {
  double distance = 0.0;
  double certified_tol = 0.0;
  Point projection;
};

/// |x - P_S x| through the cross-validated reference machinery.
DistanceEstimate estimate_distance_to_S(const Instance& instance, const Point& x, double tol = 1e-7);

/// |x - P_S x| through the interior-point route only (cheap; used for sampling).
DistanceEstimate fast_distance_to_S(const Instance& instance, const Point& x);

/// (k, alpha_k, value_k) with value the error series under study.
struct RateSeries {
  std::vector<long> k;
  std::vector<double> alpha;
  std::vector<double> value;

  void push(long kk, double a, double v) {
    k.push_back(kk);
    alpha.push_back(a);
    value.push_back(v);
  }
  std::size_t size() const { return k.size(); }
};

/// The err column of a trace (rows with k >= 1).
RateSeries err_series(const IterationTrace& trace);

struct RateEstimate {
  double exponent = 0.0;
  long k1 = 0, k2 = 0;      // tail window
  double tail_sup = 0.0;    // sup value_k / alpha_k^exponent over the window
  double slope = 0.0;       // least-squares slope of log value vs log alpha
  std::optional<double> bound;
};

/// Tail = the trailing `tail_fraction` of the k-range, i.e. k >= (1 - f) k_max.
RateEstimate fit_rate(const RateSeries& series, double exponent, double tail_fraction = 0.5);

/// sup of value_k / alpha_k^exponent over (k_max / 2^{j+1}, k_max / 2^j], j = 0..windows-1.
/// Entry 0 is the most recent window.
std::vector<double> doubling_window_sups(const RateSeries& series, double exponent, int windows);

struct OrderRecReport {
  double limit = 0.0;                // (M / tau)^{1/(1+lambda)}
  double extremal_max_rel_drift = 0.0;  // max |alpha_k M - tau beta_k^{1+lambda}| / (alpha_k M)
  bool extremal_satisfies_recursion = true;  // beta_{k+1} <= beta_k along the extremal sequence
  double tail_ratio_sup = 0.0;       // sup over k in [H/2, H] of beta_k / alpha_k^p
  double tail_ratio_inf = 0.0;
  double final_ratio = 0.0;
  /// max_k (beta_k - limit alpha_{k-1}^p); <= 0 means the simulated sequence
  /// stays under the shifted extremal envelope.
  double max_excess_over_shifted_extremal = 0.0;
  bool pass = false;  // drift <= 1e-12 and tail sup <= limit (1 + 1e-3)
};

/// Simulates beta_{k+1} = alpha_k M + beta_k max(0, 1 - tau beta_k^lambda)
/// from beta_1 and the extremal sequence limit alpha_k^{1/(1+lambda)}.
/// The max(0, .) keeps the sequence nonnegative from large starts, where the
/// plain recursion would jump below zero.
OrderRecReport check_orderrec(double M, double tau, double lambda, const StepSchedule& schedule,
                              long horizon, double beta1);

struct TheoremBounds {
  double thm33 = 0.0;                 // limsup dist(x_k, S) / alpha_k^{gamma/(2-gamma)}
  std::optional<double> thm34;        // limsup |x_k - P_S x| / alpha_k^{gamma/(4-2gamma)}
  double p = 0.0;
  double L = 0.0;                     // limsup of 1/alpha_{k+1} - 1/alpha_k
  double complexity_exponent = 0.0;   // 4/gamma - 2
  double mu_star = 0.0;               // 2 - gamma
  /// Iterations until the Thm 3.4 envelope drops below eps_target.
  std::optional<double> iterations_for(double eps_target, const StepSchedule& s) const;
};

TheoremBounds theorem_bounds(const HolderParams& params, double c0, double d0, const StepSchedule& schedule);

struct GammaProbe {
  double gamma_hat = 1.0;
  double c_hat = 1.0;
  double raw_slope = 0.0;
  std::size_t samples = 0;
  std::vector<double> log_delta, log_dist;
};

struct ProbeOptions {
  std::size_t samples = 60;
  std::uint64_t seed = 1;
  double min_radius = 1e-4;  // absolute perturbation radii, log-uniform in [min, max]
  double max_radius = 1e-1;
  /// Base points on S; the anchor's reference projection when empty.
  std::vector<Point> base_points;
};

/// Fits log dist(z, S) against log delta(z) over perturbations z of points of S.
GammaProbe probe_gamma(const Instance& instance, const ProbeOptions& opt = {});

struct ContractionReport {
  double worst_margin = 0.0;  // min over samples of dist(x)(1 - tau dist^lambda) + 1e-6 - dist(Tx)
  std::size_t samples = 0;
  bool pass = false;
};

/// Checks dist(Tx, S) <= dist(x, S)(1 - tau dist(x, S)^lambda) + 1e-6 on
/// points sampled around S.
ContractionReport contraction_certificate(const Instance& instance, OperatorKind kind,
                                          const HolderParams& params, const ProbeOptions& opt = {});

}  // namespace halpern
