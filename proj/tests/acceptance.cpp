// Acceptance runner: one PASS/FAIL line per criterion.  Run with criterion
// numbers as arguments to select a subset, e.g. `acceptance 5 9`.

#include "halpern/analysis.hpp"
#include "halpern/bench.hpp"
#include "halpern/circumcenter.hpp"
#include "halpern/drivers.hpp"
#include "halpern/instances.hpp"
#include "halpern/operators.hpp"
#include "test_support.hpp"

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

using namespace halpern;
using testsupport::uniform_vec;

namespace {

using Clock = std::chrono::steady_clock;

constexpr OperatorKind kAll[] = {OperatorKind::Map,   OperatorKind::Cimmino, OperatorKind::ThreePm,
                                 OperatorKind::A3pm,  OperatorKind::Sccrm,   OperatorKind::CrmProduct};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Point apply_in_rn(OperatorKind kind, const std::vector<ConvexBody>& bodies, const Point& x) {
  if (kind != OperatorKind::CrmProduct) return apply_operator(kind, bodies, x).output;
  const std::size_t m = bodies.size();
  return block_average(apply_crm_product(bodies, embed_diagonal(x, m)).output, m);
}

// 1. check_decrease >= -1e-8 on 20 instances per family, 500 pairs each.
Outcome decrease_suite() {
  std::mt19937_64 g(101);
  double worst = 1e300;
  std::string where;
  long pairs = 0;
  for (int fam = 0; fam < 2; ++fam) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const Instance inst = fam == 0 ? gen_ellipsoid_instance(5, 5, 0.5, seed)
                                     : gen_polyhedron_instance(5, 5, 8, 0.5, seed);
      const auto feas = testsupport::feasible_points(g, inst, 50);
      std::vector<Point> xs;
      for (int t = 0; t < 500; ++t) {
        const double r = std::pow(10.0, std::uniform_real_distribution<double>(-2.0, 0.5)(g));
        xs.push_back(feas[static_cast<std::size_t>(t) % feas.size()] + uniform_vec(g, inst.n, -r, r));
      }
      for (auto k : kAll) {
        OperatorOptions opt;
        opt.measure_epsilon = k == OperatorKind::A3pm;
        for (int t = 0; t < 500; ++t) {
          const Point& s = feas[static_cast<std::size_t>(t * 7 + 3) % feas.size()];
          const double margin = check_decrease(k, inst.bodies, xs[static_cast<std::size_t>(t)], s, 1e-9, opt);
          ++pairs;
          if (margin < worst) {
            worst = margin;
            where = inst.family + " seed " + std::to_string(seed) + " " + std::string(to_string(k));
          }
        }
      }
    }
  }
  return {worst >= -1e-8, std::to_string(pairs) + " pairs, worst margin " + fmt(worst) + " (" + where + ")"};
}

// 2. S is contained in Fix(T): 200 feasible points per operator.
Outcome fixed_point_suite() {
  std::mt19937_64 g(202);
  double worst = 0.0;
  std::vector<Instance> insts;
  for (std::uint64_t seed = 1; seed <= 2; ++seed) {
    insts.push_back(gen_ellipsoid_instance(6, 5, 0.5, seed));
    insts.push_back(gen_polyhedron_instance(4, 5, 8, 0.5, seed));
  }
  std::vector<std::pair<const Instance*, Point>> pts;
  for (const auto& inst : insts) {
    for (const auto& s : testsupport::feasible_points(g, inst, 50)) pts.emplace_back(&inst, s);
  }
  for (auto k : kAll) {
    for (const auto& [inst, s] : pts) worst = std::max(worst, (apply_in_rn(k, inst->bodies, s) - s).norm());
  }
  return {worst <= 1e-8, "6 operators x " + std::to_string(pts.size()) + " points, max |T s - s| = " + fmt(worst)};
}

// Nearest point of the ellipse c + M (cos t, sin t) to x.
Point sweep_ellipse(const Point& c, const Matrix& M, const Point& x) {
  auto at = [&](double t) { return Point(c + M * (Vector(2) << std::cos(t), std::sin(t)).finished()); };
  auto f = [&](double t) { return (at(t) - x).squaredNorm(); };
  const long samples = 1'000'000;
  const double h = 2.0 * M_PI / static_cast<double>(samples);
  double best_t = 0.0, best = f(0.0);
  for (long i = 1; i < samples; ++i) {
    const double v = f(h * static_cast<double>(i));
    if (v < best) {
      best = v;
      best_t = h * static_cast<double>(i);
    }
  }
  double a = best_t - h, b = best_t + h;
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 100; ++it) {
    const double u = b - r * (b - a), w = a + r * (b - a);
    if (f(u) < f(w)) b = w; else a = u;
  }
  return at(0.5 * (a + b));
}

// 3. Idempotence, Pythagorean inequality, 2-D sweep agreement.
Outcome projection_suite() {
  std::mt19937_64 g(303);
  double idem = 0.0, pyth = 0.0, sweep = 0.0;
  std::vector<ConvexBody> bodies;
  for (int i = 0; i < 10; ++i) {
    bodies.emplace_back(testsupport::random_ellipsoid(g, 6));
    bodies.emplace_back(Halfspace(uniform_vec(g, 6), 0.2));
    Matrix A = Matrix::NullaryExpr(8, 6, [&] { return std::uniform_real_distribution<double>(-1, 1)(g); });
    bodies.emplace_back(Polyhedron(A, Vector::Constant(8, 0.5)));
    bodies.emplace_back(Ball(uniform_vec(g, 6), 1.0));
  }
  for (const auto& b : bodies) {
    std::vector<Point> members;
    for (int i = 0; i < 20; ++i) members.push_back(project(b, uniform_vec(g, 6, -3, 3)));
    for (int t = 0; t < 200; ++t) {
      const Point x = uniform_vec(g, 6, -4, 4);
      const Point p = project(b, x);
      idem = std::max(idem, (project(b, p) - p).norm());
      const Point& s = members[static_cast<std::size_t>(t) % members.size()];
      pyth = std::max(pyth, (x - p).squaredNorm() + (p - s).squaredNorm() - (x - s).squaredNorm());
    }
  }
  for (int t = 0; t < 50; ++t) {
    const Ellipsoid e = testsupport::random_ellipsoid(g, 2);
    Point x = uniform_vec(g, 2, -4, 4);
    while (e.residual(x) <= 0.0) x *= 1.5;
    const Matrix L = e.shape().llt().matrixL();
    const Matrix M = L.transpose().inverse() * e.radius();
    sweep = std::max(sweep, (project(e, x) - sweep_ellipse(e.center(), M, x)).norm());
  }
  const bool pass = idem <= 1e-10 && pyth <= 1e-9 && sweep <= 1e-6;
  return {pass, "idempotence " + fmt(idem) + ", Pythagorean excess " + fmt(pyth) + ", 50 sweeps max gap " + fmt(sweep)};
}

// 4. 1000 three-point sets in dimensions 2..50 with forced degeneracies.
Outcome circumcenter_suite() {
  std::mt19937_64 g(404);
  std::uniform_int_distribution<int> dim(2, 50);
  double worst_eq = 0.0, worst_hull = 0.0;
  int failing_collinear = 0, failing_other = 0;
  for (int t = 0; t < 1000; ++t) {
    const Index n = dim(g);
    Point p0 = uniform_vec(g, n, -2, 2), p1 = uniform_vec(g, n, -2, 2), p2 = uniform_vec(g, n, -2, 2);
    const int kind = t % 5;  // 0-2 generic, 3 coincident, 4 collinear distinct
    if (kind == 3) {
      if (t % 2 == 0) p1 = p0; else p2 = p1 = p0;
    } else if (kind == 4) {
      const double s = std::uniform_real_distribution<double>(-3, 3)(g);
      p2 = p0 + s * (p1 - p0);
    }
    const std::vector<Point> pts{p0, p1, p2};
    const auto r = circumcenter(pts);
    double lo = 1e300, hi = 0.0;
    for (const auto& p : pts) {
      lo = std::min(lo, (r.center - p).norm());
      hi = std::max(hi, (r.center - p).norm());
    }
    const double eq = (hi - lo) / (1.0 + r.radius);
    Matrix D(n, 2);
    D << p1 - p0, p2 - p0;
    const Vector coef = D.completeOrthogonalDecomposition().solve(r.center - p0);
    const double hull = (p0 + D * coef - r.center).norm();
    worst_eq = std::max(worst_eq, eq);
    worst_hull = std::max(worst_hull, hull);
    if (eq > 1e-9 || hull > 1e-9) (kind == 4 ? failing_collinear : failing_other)++;
  }
  return {worst_eq <= 1e-9 && worst_hull <= 1e-9,
          "max equidistance residual " + fmt(worst_eq) + ", max hull residual " + fmt(worst_hull) +
              "; failing sets: " + std::to_string(failing_collinear) + " collinear-distinct, " +
              std::to_string(failing_other) + " other"};
}

// 5. Extremal equality and tail ratio of the order recursion.
Outcome orderrec_suite() {
  std::mt19937_64 g(505);
  std::uniform_real_distribution<double> um(1.0, 10.0), ut(0.5, 1.0), ul(0.0, 1.5), ub(0.0, 20.0);
  double drift = 0.0, tail = 0.0;
  bool recursion = true;
  const auto s = StepSchedule::inv_k();
  for (int t = 0; t < 20; ++t) {
    const double M = um(g), tau = ut(g), lambda = ul(g);
    const double limit = std::pow(M / tau, 1.0 / (1.0 + lambda));
    for (double beta1 : {0.0, 10.0 * limit, ub(g)}) {
      const auto r = check_orderrec(M, tau, lambda, s, 10'000'000, beta1);
      drift = std::max(drift, r.extremal_max_rel_drift);
      recursion = recursion && r.extremal_satisfies_recursion;
      tail = std::max({tail, std::abs(r.tail_ratio_sup / r.limit - 1.0), std::abs(r.tail_ratio_inf / r.limit - 1.0)});
    }
  }
  return {drift <= 1e-12 && recursion && tail <= 1e-3,
          "20 triples x 3 starts: extremal drift " + fmt(drift) + ", max tail ratio deviation " + fmt(tail)};
}

// 6. Every operator reaches |x_k - s*| <= 1e-2 on 10 ellipsoid instances.
Outcome global_convergence() {
  int ok = 0, total = 0, map_capped = 0;
  std::string misses;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Instance inst = gen_ellipsoid_instance(10, 10, 1.0, seed);
    attach_reference(inst, 1e-8);
    for (auto k : kAll) {
      StopRule stop;
      stop.max_iters = 1'000'000;
      stop.wall_limit = 60.0;
      TraceOptions tr;
      tr.enabled = false;
      const auto r = halpern_solve(inst, k, StepSchedule::inv_k(), stop, {{}, tr});
      ++total;
      if (r.report.status == SolveStatus::Converged) {
        ++ok;
      } else if (k == OperatorKind::Map) {
        ++map_capped;
      } else {
        misses += " " + std::string(to_string(k)) + "@" + std::to_string(seed);
      }
    }
  }
  return {ok + map_capped == total, std::to_string(ok) + "/" + std::to_string(total) +
                                        " solves converged, MAP capped " + std::to_string(map_capped) +
                                        (misses.empty() ? "" : ", misses:" + misses)};
}

// 7. Table-1 shape: Cimmino, SCCRM, CRM converge in <= 5 iterations and beat Dykstra.
Outcome few_iteration_claim() {
  const std::pair<Index, Index> cells[] = {{10, 10}, {20, 10}, {20, 20}, {20, 100}};
  bool pass = true;
  std::string detail;
  for (const auto& [m, n] : cells) {
    Instance inst = gen_ellipsoid_instance(m, n, 1.0, 1);
    attach_reference(inst, 1e-8);
    StopRule stop;
    stop.wall_limit = 60.0;
    TraceOptions tr;
    tr.enabled = false;
    const auto dy = dykstra_solve(inst, stop, {{}, tr});
    const bool dy_ok = dy.report.status == SolveStatus::Converged;
    detail += " (" + std::to_string(m) + "," + std::to_string(n) + "): dykstra " +
              (dy_ok ? std::to_string(dy.report.iterations) : std::string(to_string(dy.report.status)));
    for (auto k : {OperatorKind::Cimmino, OperatorKind::Sccrm, OperatorKind::CrmProduct}) {
      const auto r = halpern_solve(inst, k, StepSchedule::inv_k(), stop, {{}, tr});
      const bool conv = r.report.status == SolveStatus::Converged;
      const long it = r.report.iterations;
      detail += " " + std::string(to_string(k)) + " " + (conv ? std::to_string(it) : std::string(to_string(r.report.status)));
      if (!conv || it > 5) pass = false;
      if (dy_ok && conv && it >= dy.report.iterations) pass = false;
    }
    detail += ";";
  }
  return {pass, "iterations per cell:" + detail};
}

// 8. Rate ratios for Halpern-MAP on a Slater ellipsoid instance.
Outcome rate_verification() {
  Instance inst = gen_ellipsoid_instance(5, 5, 1.0, 11);
  attach_reference(inst, 1e-10);
  const GammaProbe probe = probe_gamma(inst);
  StopRule stop;
  stop.max_iters = 100'000;
  stop.stop_on_target = false;
  stop.wall_limit = 0.0;
  TraceOptions tr;
  tr.store_iterates = true;
  tr.record_delta = false;
  const auto res = halpern_solve(inst, OperatorKind::Map, StepSchedule::inv_k(), stop, {{}, tr});

  const RateSeries err = err_series(res.trace);
  const auto err_sups = doubling_window_sups(err, 0.5, 2);

  RateSeries dist;
  const long kmax = res.trace.iterates.back().k;
  for (const auto& it : res.trace.iterates) {
    if (it.k <= kmax / 4 || it.k % 250 != 0) continue;
    dist.push(it.k, schedule_alpha(StepSchedule::inv_k(), it.k), fast_distance_to_S(inst, it.x).distance);
  }
  const auto dist_sups = doubling_window_sups(dist, 1.0, 2);

  auto stable = [](const std::vector<double>& w) {
    const double hi = std::max(w[0], w[1]), lo = std::min(w[0], w[1]);
    return std::isfinite(hi) && (hi == 0.0 || (hi - lo) / hi < 0.2);
  };
  const bool pass = probe.gamma_hat >= 0.9 && stable(err_sups) && stable(dist_sups);
  return {pass, "gamma_hat " + fmt(probe.gamma_hat) + "; |x_k - s*|/alpha^0.5 window sups (latest, previous) " +
                    fmt(err_sups[0]) + ", " + fmt(err_sups[1]) + "; dist/alpha window sups " + fmt(dist_sups[0]) +
                    ", " + fmt(dist_sups[1])};
}

// 9. Stepsize conditions over horizon 1e5.
Outcome schedule_validation() {
  const auto a = validate_schedule(StepSchedule::inv_k(), 100000);
  const auto b = validate_schedule(StepSchedule::inv_sqrt_k(), 100000);
  const auto h = validate_schedule(StepSchedule::harmonic(3.0), 100000);
  const bool h_fails = !h.reciprocal_gap.pass && h.reciprocal_gap.witness_k.has_value() && h.reciprocal_gap.value >= 2.0;
  return {a.all_pass() && b.all_pass() && h_fails,
          std::string("inv_k ") + (a.all_pass() ? "pass" : "fail") + ", inv_sqrt_k " + (b.all_pass() ? "pass" : "fail") +
              ", harmonic:3 (iii) value " + fmt(h.reciprocal_gap.value) + " at k=" +
              std::to_string(h.reciprocal_gap.witness_k.value_or(-1))};
}

// 10. Dual-route agreement on 40 instances and the polyhedral KKT certificate.
Outcome oracle_integrity() {
  double worst = 0.0, worst_kkt = 0.0;
  int failures = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    for (int fam = 0; fam < 2; ++fam) {
      const Instance inst = fam == 0 ? gen_ellipsoid_instance(10, 10, 1.0, seed)
                                     : gen_polyhedron_instance(5, 8, 10, 0.5, seed);
      try {
        const auto r = reference_projection(inst, 1e-7);
        worst = std::max(worst, r.disagreement);
        if (fam == 1) worst_kkt = std::max(worst_kkt, kkt_normal_cone_residual(inst, r.point));
      } catch (const std::exception&) {
        ++failures;
      }
    }
  }
  return {failures == 0 && worst <= 1e-6 && worst_kkt <= 1e-6,
          "max route disagreement " + fmt(worst) + ", max KKT residual " + fmt(worst_kkt) + ", oracle failures " +
              std::to_string(failures)};
}

// 11. Benchmark CSV byte-identical across reruns and thread counts.
Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "halpern_acceptance";
  fs::create_directories(dir);
  const fs::path plan = dir / "plan.json";
  {
    std::ofstream f(plan);
    f << R"({"err_tol": 0.01, "time_limit": 600, "max_iters": 20000, "omit_timing": true,
  "methods": ["map", "cimmino", "cimmino_par", "3pm", "a3pm", "a3pm_par", "sccrm", "crm", "dykstra"],
  "schedules": ["inv_k", "inv_sqrt_k"],
  "cells": [{"family": "ellipsoid", "m": 10, "n": 10, "theta": 1.0, "seed": 1},
            {"family": "ellipsoid", "m": 10, "n": 10, "theta": 0.01, "seed": 2},
            {"family": "polyhedron", "m": 5, "n": 8, "k": 10, "spread": 0.5, "seed": 3},
            {"family": "polyhedron", "m": 5, "n": 8, "k": 10, "spread": 0.5, "seed": 4}]})";
  }
  auto run = [&](const std::string& extra, const fs::path& out) {
    const std::string cmd = std::string(HALPERN_CLI_PATH) + " bench --plan " + plan.string() + " " + extra +
                            " --out " + out.string() + " > /dev/null 2>&1";
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) && WEXITSTATUS(raw) == 0;
  };
  auto slurp = [](const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
  };
  const bool ran = run("--threads 1", dir / "a.csv") && run("--threads 1", dir / "b.csv") &&
                   run("--threads 4", dir / "c.csv");
  if (!ran) return {false, "benchmark command failed"};
  const std::string a = slurp(dir / "a.csv");
  const bool same = a == slurp(dir / "b.csv") && a == slurp(dir / "c.csv");
  const long rows = std::count(a.begin(), a.end(), '\n') - 1;
  return {same && rows > 0, std::to_string(rows) + " rows, reruns " + (same ? "identical" : "differ")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"decrease inequality", decrease_suite},
      {"fixed points", fixed_point_suite},
      {"projections", projection_suite},
      {"circumcenter", circumcenter_suite},
      {"order recursion", orderrec_suite},
      {"global convergence", global_convergence},
      {"few-iteration claim", few_iteration_claim},
      {"rate verification", rate_verification},
      {"schedule validation", schedule_validation},
      {"oracle integrity", oracle_integrity},
      {"determinism", determinism},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!wanted.empty() && !wanted.count(id)) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    std::printf("criterion %2d %s  %s: %s [%.1fs]\n", id, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
