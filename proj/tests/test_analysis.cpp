#include "halpern/analysis.hpp"
#include "halpern/errors.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <iostream>

using namespace halpern;

namespace {

Point pt(double a, double b) { return (Vector(2) << a, b).finished(); }

RateSeries synthetic(const StepSchedule& s, long kmax, const std::function<double(double)>& f) {
  RateSeries r;
  for (long k = 1; k <= kmax; ++k) {
    const double a = schedule_alpha(s, k);
    r.push(k, a, f(a));
  }
  return r;
}

}  // namespace

TEST_CASE("HolderParams derived quantities") {
  const HolderParams h{0.5, 2.0};
  CHECK(h.lambda() == doctest::Approx(2.0));
  CHECK(h.p() == doctest::Approx(1.0 / 3.0));
  CHECK(h.tau(1.0) == doctest::Approx(1.0 / (2.0 * 16.0)));
  CHECK_THROWS_AS((HolderParams{0.0, 1.0}).validate(), InputError);
  CHECK_THROWS_AS((HolderParams{1.0, 0.5}).validate(), InputError);
}

TEST_CASE("fit_rate on synthetic series") {
  const auto s = StepSchedule::inv_k();
  const auto est = fit_rate(synthetic(s, 20000, [](double a) { return 3.0 * std::sqrt(a); }), 0.5);
  CHECK(est.tail_sup == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(est.slope == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(est.k1 < est.k2);
  CHECK(est.k2 == 20000);

  const auto fast1 = fit_rate(synthetic(s, 1000, [](double a) { return a; }), 0.5);
  const auto fast2 = fit_rate(synthetic(s, 100000, [](double a) { return a; }), 0.5);
  CHECK(fast2.tail_sup < fast1.tail_sup);
  CHECK(fast2.tail_sup < 0.01);

  const auto zero = fit_rate(synthetic(s, 1000, [](double) { return 0.0; }), 0.5);
  CHECK(zero.tail_sup == 0.0);
  CHECK_THROWS_AS(fit_rate(synthetic(s, 1000, [](double a) { return a; }), -1.0), InputError);

  const auto sups = doubling_window_sups(synthetic(s, 4096, [](double a) { return 3.0 * std::sqrt(a); }), 0.5, 3);
  REQUIRE(sups.size() == 3);
  for (double v : sups) CHECK(v == doctest::Approx(3.0));
}

TEST_CASE("check_orderrec examples") {
  const auto inv_k = StepSchedule::inv_k();
  const auto r = check_orderrec(1.0, 1.0, 0.0, inv_k, 10000, 0.0);
  CHECK(r.limit == doctest::Approx(1.0));
  CHECK(r.extremal_max_rel_drift <= 1e-12);
  CHECK(r.extremal_satisfies_recursion);
  CHECK(r.max_excess_over_shifted_extremal <= 0.0);

  const auto big = check_orderrec(4.0, 0.5, 2.0, inv_k, 1'000'000, 10.0);
  CHECK(big.limit == doctest::Approx(2.0));
  CHECK(std::abs(big.final_ratio / 2.0 - 1.0) <= 1e-3);
  CHECK(big.tail_ratio_sup <= 2.0 * (1 + 1e-3));
  CHECK(big.pass);

  CHECK_THROWS_AS(check_orderrec(1.0, 1.0, 0.0, inv_k, 100, 0.0), InputError);
  CHECK_THROWS_AS(check_orderrec(-1.0, 1.0, 0.0, inv_k, 1000, 0.0), InputError);
}

TEST_CASE("check_orderrec extremal drift on random triples") {
  std::mt19937_64 g(3);
  std::uniform_real_distribution<double> um(0.1, 10.0), ut(0.05, 1.0), ul(0.0, 3.0);
  for (int t = 0; t < 20; ++t) {
    const auto r = check_orderrec(um(g), ut(g), ul(g), StepSchedule::inv_k(), 2000, 1.0);
    CHECK(r.extremal_max_rel_drift <= 1e-12);
  }
}

TEST_CASE("theorem_bounds examples") {
  const HolderParams lin{1.0, 1.5};
  const auto b = theorem_bounds(lin, 0.25, 2.0, StepSchedule::inv_k());
  REQUIRE(b.thm34.has_value());
  CHECK(*b.thm34 == doctest::Approx(2.0 * 1.5 * 2.0 / std::sqrt(0.25)));
  CHECK(b.thm33 == doctest::Approx(2.0 * 1.5 * 1.5 * 2.0 / 0.25));
  CHECK(b.mu_star == 1.0);
  CHECK(b.p == 1.0);
  CHECK(b.L == 1.0);

  const auto half = theorem_bounds(HolderParams{0.5, 1.0}, 1.0, 1.0, StepSchedule::inv_k());
  CHECK(half.mu_star == 1.5);
  CHECK(half.complexity_exponent == doctest::Approx(6.0));

  CHECK_FALSE(theorem_bounds(lin, 1.0, 1.0, StepSchedule::harmonic(2.0)).thm34.has_value());
  CHECK(theorem_bounds(lin, 1.0, 1.0, StepSchedule::inv_sqrt_k()).L == 0.0);

  // For inv_k the Thm 3.4 envelope B k^{-1/2} drops below eps at k = (B/eps)^2.
  const auto n = b.iterations_for(1e-2, StepSchedule::inv_k());
  REQUIRE(n.has_value());
  CHECK(*n == doctest::Approx(std::pow(*b.thm34 / 1e-2, 2.0)).epsilon(1e-9));
}

TEST_CASE("estimate_distance_to_S examples") {
  const Instance quad = Instance::from_bodies({Halfspace(pt(1, 0), 0.0), Halfspace(pt(0, 1), 0.0)}, pt(1, 1));
  CHECK(estimate_distance_to_S(quad, pt(1, 1)).distance == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
  CHECK(estimate_distance_to_S(quad, pt(-1, -1)).distance <= 1e-7);
  const Halfspace h(pt(2, 1), 0.3);
  const Instance one = Instance::from_bodies({h}, pt(4, 1));
  CHECK(estimate_distance_to_S(one, pt(4, 1)).distance == doctest::Approx(distance(h, pt(4, 1))).epsilon(1e-9));
}

TEST_CASE("probe_gamma on a halfspace") {
  const Instance one = Instance::from_bodies({Halfspace(pt(2, 1), 0.3)}, pt(4, 1));
  const auto g = probe_gamma(one);
  CHECK(g.samples >= 50);
  CHECK(g.gamma_hat == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(g.c_hat == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("probe_gamma on Slater ellipsoid instances") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    Instance inst = gen_ellipsoid_instance(5, 4, 1.0, seed);
    attach_reference(inst, 1e-8);
    const auto g = probe_gamma(inst);
    CHECK(g.gamma_hat >= 0.9);
  }
}

TEST_CASE("probe_gamma on tangent disks") {
  Instance inst = Instance::from_bodies({Ball(pt(-1, 0), 1.0), Ball(pt(1, 0), 1.0)}, pt(0, 1));
  ProbeOptions opt;
  opt.base_points = {pt(0, 0)};
  const auto g = probe_gamma(inst, opt);
  MESSAGE("tangent disks: gamma_hat = " << g.gamma_hat << ", raw slope = " << g.raw_slope);
  CHECK(g.gamma_hat < 0.99);
}

TEST_CASE("contraction certificate on ellipsoid instances") {
  Instance inst = gen_ellipsoid_instance(4, 3, 1.0, 5);
  attach_reference(inst, 1e-8);
  const auto probe = probe_gamma(inst);
  const HolderParams params{probe.gamma_hat, probe.c_hat};
  ProbeOptions opt;
  opt.samples = 50;
  for (auto k : {OperatorKind::Map, OperatorKind::Cimmino, OperatorKind::ThreePm, OperatorKind::A3pm,
                 OperatorKind::Sccrm, OperatorKind::CrmProduct}) {
    CAPTURE(to_string(k));
    const auto rep = contraction_certificate(inst, k, params, opt);
    CHECK(rep.samples > 0);
    CHECK(rep.pass);
  }
}
