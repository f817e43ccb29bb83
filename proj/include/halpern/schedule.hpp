#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace halpern {

/// alpha_k = 1/k, 1/sqrt(k) or 1/(mu k), clamped into (0, 1 - 1e-12].
struct StepSchedule {
  enum class Kind { InvK, InvSqrtK, Harmonic };
  Kind kind = Kind::InvK;
  double mu = 1.0;  // Harmonic only

  static StepSchedule inv_k() { return {Kind::InvK, 1.0}; }
  static StepSchedule inv_sqrt_k() { return {Kind::InvSqrtK, 1.0}; }
  static StepSchedule harmonic(double mu);

  /// inv_k, inv_sqrt_k, harmonic:<mu>
  std::string label() const;
};

StepSchedule parse_schedule(std::string_view text);

inline constexpr double kMaxAlpha = 1.0 - 1e-12;

double schedule_alpha(const StepSchedule& s, long k);

struct ConditionCheck {
  bool pass = true;
  std::optional<long> witness_k;
  double value = 0.0;  // the quantity compared against the threshold
};

/// Finite-horizon check of the four stepsize conditions.
///  (i)   0 < alpha_k < 1 for k <= horizon
///  (ii)  alpha_k nonincreasing and strictly smaller at the horizon than at horizon/2
///  (iii) sup_{k >= horizon/2} (1/alpha_{k+1} - 1/alpha_k) < 2
///  (iv)  sup_{k >= horizon/2} |alpha_k/alpha_{k+1} - 1| <= 0.05 and not increasing
///        between horizon/2 and the horizon
struct ScheduleValidation {
  ConditionCheck in_unit_interval;
  ConditionCheck vanishing;
  ConditionCheck reciprocal_gap;
  ConditionCheck ratio_to_one;
  bool all_pass() const {
    return in_unit_interval.pass && vanishing.pass && reciprocal_gap.pass && ratio_to_one.pass;
  }
};

ScheduleValidation validate_schedule(const StepSchedule& s, long horizon);

/// limsup_k (1/alpha_{k+1} - 1/alpha_k) in closed form: 1 for inv_k, 0 for
/// inv_sqrt_k, mu for harmonic.
double reciprocal_gap_limit(const StepSchedule& s);

}  // namespace halpern
