#include "halpern/schedule.hpp"

#include "halpern/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace halpern {

StepSchedule StepSchedule::harmonic(double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw InputError("harmonic schedule needs mu > 0");
  return {Kind::Harmonic, mu};
}

std::string StepSchedule::label() const {
  switch (kind) {
    case Kind::InvK: return "inv_k";
    case Kind::InvSqrtK: return "inv_sqrt_k";
    case Kind::Harmonic: {
      std::ostringstream os;
      os << "harmonic:" << mu;
      return os.str();
    }
  }
  return "?";
}

StepSchedule parse_schedule(std::string_view text) {
  if (text == "inv_k") return StepSchedule::inv_k();
  if (text == "inv_sqrt_k") return StepSchedule::inv_sqrt_k();
  constexpr std::string_view prefix = "harmonic:";
  if (text.substr(0, prefix.size()) == prefix) {
    const std::string_view rest = text.substr(prefix.size());
    double mu = 0.0;
    const auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), mu);
    if (ec != std::errc() || ptr != rest.data() + rest.size()) {
      throw InputError("bad harmonic parameter in '" + std::string(text) + "'");
    }
    return StepSchedule::harmonic(mu);
  }
  throw InputError("unknown schedule '" + std::string(text) + "' (inv_k | inv_sqrt_k | harmonic:<mu>)");
}

double schedule_alpha(const StepSchedule& s, long k) {
  if (k < 1) throw InputError("schedule_alpha: k must be >= 1");
  const double kd = static_cast<double>(k);
  double a = 0.0;
  switch (s.kind) {
    case StepSchedule::Kind::InvK: a = 1.0 / kd; break;
    case StepSchedule::Kind::InvSqrtK: a = 1.0 / std::sqrt(kd); break;
    case StepSchedule::Kind::Harmonic: a = 1.0 / (s.mu * kd); break;
  }
  return std::min(a, kMaxAlpha);
}

double reciprocal_gap_limit(const StepSchedule& s) {
  switch (s.kind) {
    case StepSchedule::Kind::InvK: return 1.0;
    case StepSchedule::Kind::InvSqrtK: return 0.0;
    case StepSchedule::Kind::Harmonic: return s.mu;
  }
  return 0.0;
}

ScheduleValidation validate_schedule(const StepSchedule& s, long horizon) {
  if (horizon < 100) throw InputError("validate_schedule: horizon must be >= 100");
  ScheduleValidation v;
  const long half = horizon / 2;

  double prev = schedule_alpha(s, 1);
  for (long k = 1; k <= horizon; ++k) {
    const double a = schedule_alpha(s, k);
    if (v.in_unit_interval.pass && !(a > 0.0 && a < 1.0)) {
      v.in_unit_interval = {false, k, a};
    }
    if (v.vanishing.pass && a > prev) v.vanishing = {false, k, a - prev};
    prev = a;
  }
  const double a_half = schedule_alpha(s, half);
  const double a_end = schedule_alpha(s, horizon);
  if (v.vanishing.pass) {
    v.vanishing.value = a_end;
    if (!(a_end < a_half)) v.vanishing = {false, horizon, a_end};
  }

  double gap_sup = -INFINITY;
  long gap_k = -1;  // first k with gap >= 2
  double ratio_sup = 0.0;
  long ratio_k = half;
  for (long k = half; k < horizon; ++k) {
    const double a = schedule_alpha(s, k);
    const double b = schedule_alpha(s, k + 1);
    const double gap = 1.0 / b - 1.0 / a;
    gap_sup = std::max(gap_sup, gap);
    if (gap_k < 0 && !(gap < 2.0)) gap_k = k;
    const double r = std::abs(a / b - 1.0);
    if (r > ratio_sup) {
      ratio_sup = r;
      ratio_k = k;
    }
  }
  v.reciprocal_gap.value = gap_sup;
  if (!(gap_sup < 2.0)) {
    v.reciprocal_gap.pass = false;
    v.reciprocal_gap.witness_k = gap_k;
  }

  const double r_half = std::abs(schedule_alpha(s, half) / schedule_alpha(s, half + 1) - 1.0);
  const double r_end = std::abs(schedule_alpha(s, horizon - 1) / schedule_alpha(s, horizon) - 1.0);
  v.ratio_to_one.value = ratio_sup;
  if (ratio_sup > 0.05) {
    v.ratio_to_one.pass = false;
    v.ratio_to_one.witness_k = ratio_k;
  } else if (r_end > r_half * (1.0 + 1e-9) + 1e-15) {
    v.ratio_to_one.pass = false;
    v.ratio_to_one.witness_k = horizon - 1;
  }
  return v;
}

}  // namespace halpern
