// halpern: benchmark, single-solve, rate-analysis and instance-generation front end.

#include "halpern/analysis.hpp"
#include "halpern/bench.hpp"
#include "halpern/errors.hpp"
#include "halpern/instances.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace halpern;

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct CellFlags {
  std::string family = "ellipsoid";
  long m = 10, n = 10, k = 5;
  double theta = 1.0;
  double spread = 0.5;
  std::uint64_t seed = 1;

  void add(CLI::App* app) {
    app->add_option("--family", family, "ellipsoid | polyhedron")->check(CLI::IsMember({"ellipsoid", "polyhedron"}));
    app->add_option("--m", m, "number of sets")->check(CLI::PositiveNumber);
    app->add_option("--n", n, "dimension")->check(CLI::PositiveNumber);
    app->add_option("--k", k, "rows per polyhedron")->check(CLI::PositiveNumber);
    app->add_option("--theta", theta, "radius of the ball inside every ellipsoid")->check(CLI::PositiveNumber);
    app->add_option("--spread", spread, "polyhedral right-hand-side spread alpha")->check(CLI::NonNegativeNumber);
    app->add_option("--seed", seed, "instance seed");
  }
  BenchCell cell() const {
    BenchCell c;
    c.family = family;
    c.m = m;
    c.n = n;
    c.k = family == "polyhedron" ? k : 0;
    c.theta = theta;
    c.spread = spread;
    c.seed = seed;
    return c;
  }
};

template <class F>
int guarded(F&& f) {
  try {
    f();
    return 0;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

std::ostream& open_out(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path, std::ios::binary | std::ios::trunc);
  if (!file) throw InputError("cannot open '" + path + "' for writing");
  return file;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Halpern-type anchored iterations for best approximation problems"};
  app.require_subcommand(1);

  // bench
  auto* bench = app.add_subcommand("bench", "run a benchmark grid and write CSV");
  std::string plan_path, bench_out, bench_methods = "map,cimmino,3pm,a3pm,sccrm,crm,dykstra";
  std::vector<std::string> bench_alpha{"inv_k"};
  CellFlags bench_cell;
  double bench_eps = 1e-2, bench_time = 60.0;
  long bench_iters = 1'000'000;
  int bench_threads = 1;
  bool omit_timing = false;
  bench->add_option("--plan", plan_path, "JSON plan file (overrides the cell flags)");
  bench_cell.add(bench);
  bench->add_option("--methods", bench_methods, "comma-separated methods");
  bench->add_option("--alpha", bench_alpha, "stepsize schedules: inv_k | inv_sqrt_k | harmonic:<mu>");
  bench->add_option("--eps", bench_eps, "error tolerance |x_k - s*|")->check(CLI::PositiveNumber);
  bench->add_option("--time-limit", bench_time, "seconds per solve");
  bench->add_option("--max-iters", bench_iters, "iteration cap per solve");
  bench->add_option("--threads", bench_threads, "workers for cells and parallel variants")->check(CLI::PositiveNumber);
  bench->add_flag("--omit-timing", omit_timing, "write wall_time_s as NA for byte-stable output");
  bench->add_option("--out", bench_out, "CSV path (default stdout)");

  // solve
  auto* solve = app.add_subcommand("solve", "solve one instance file");
  std::string solve_instance, solve_method = "cimmino", solve_alpha = "inv_k", solve_trace;
  double solve_eps = 1e-2, solve_time = 60.0, solve_feas = 1e-6;
  long solve_iters = 1'000'000;
  int solve_threads = 1;
  bool solve_feas_mode = false;
  solve->add_option("--instance", solve_instance, "instance JSON")->required();
  solve->add_option("--method", solve_method, "map | cimmino | cimmino_par | 3pm | a3pm | a3pm_par | sccrm | crm | dykstra");
  solve->add_option("--alpha", solve_alpha, "stepsize schedule");
  solve->add_option("--eps", solve_eps, "error tolerance")->check(CLI::PositiveNumber);
  solve->add_option("--feas-tol", solve_feas, "violation tolerance in feasibility mode");
  solve->add_flag("--feasibility", solve_feas_mode, "stop on delta(x_k) even when a reference exists");
  solve->add_option("--time-limit", solve_time, "seconds");
  solve->add_option("--max-iters", solve_iters, "iteration cap");
  solve->add_option("--threads", solve_threads, "threads for parallel variants")->check(CLI::PositiveNumber);
  solve->add_option("--trace", solve_trace, "write the trace CSV here");

  // rates
  auto* rates = app.add_subcommand("rates", "run to a horizon and fit the rate ratios");
  std::string rates_instance, rates_method = "map", rates_alpha = "inv_k", rates_out;
  long rates_horizon = 10000;
  int rates_threads = 1;
  rates->add_option("--instance", rates_instance, "instance JSON with reference")->required();
  rates->add_option("--method", rates_method, "operator");
  rates->add_option("--alpha", rates_alpha, "stepsize schedule");
  rates->add_option("--horizon", rates_horizon, "iterations (>= 100)");
  rates->add_option("--threads", rates_threads, "threads for parallel variants")->check(CLI::PositiveNumber);
  rates->add_option("--out", rates_out, "CSV path (default stdout)");

  // gen
  auto* gen = app.add_subcommand("gen", "generate an instance file");
  CellFlags gen_cell;
  std::string gen_out;
  double gen_ref_tol = 1e-7;
  bool gen_no_ref = false;
  gen_cell.add(gen);
  gen->add_option("--reference-tol", gen_ref_tol, "oracle tolerance (<= 1e-6)");
  gen->add_flag("--no-reference", gen_no_ref, "skip the reference solution");
  gen->add_option("--out", gen_out, "instance path")->required();

  CLI11_PARSE(app, argc, argv);

  if (bench->parsed()) {
    return guarded([&] {
      BenchmarkPlan plan;
      if (!plan_path.empty()) {
        plan = load_plan(plan_path);
      } else {
        plan.cells.push_back(bench_cell.cell());
        plan.methods = split_commas(bench_methods);
        for (const auto& a : bench_alpha) plan.schedules.push_back(parse_schedule(a));
        plan.err_tol = bench_eps;
        plan.time_limit = bench_time;
        plan.max_iters = bench_iters;
      }
      if (bench->count("--threads")) plan.threads = bench_threads;
      if (omit_timing) plan.omit_timing = true;
      std::ofstream file;
      run_bench(plan, open_out(bench_out, file));
    });
  }

  if (solve->parsed()) {
    return guarded([&] {
      const Instance inst = load_instance(solve_instance);
      const MethodSpec method = parse_method(solve_method);
      const StepSchedule sched = parse_schedule(solve_alpha);
      StopRule stop;
      stop.err_tol = solve_eps;
      stop.feas_tol = solve_feas;
      stop.force_feasibility_mode = solve_feas_mode;
      stop.max_iters = solve_iters;
      stop.wall_limit = solve_time;
      TraceOptions trace;
      trace.enabled = !solve_trace.empty();
      const SolveResult r = run_method(inst, method, sched, stop, solve_threads, trace);
      const SolveReport& rep = r.report;
      std::cout << "method       " << rep.method << '\n'
                << "schedule     " << (method.dykstra ? std::string("none") : rep.schedule) << '\n'
                << "m n k        " << rep.m << ' ' << rep.n << ' ' << rep.k << '\n'
                << "status       " << to_string(rep.status) << '\n'
                << "iterations   " << rep.iterations << '\n'
                << "wall_time_s  " << rep.wall_time_s << '\n'
                << "final_err    " << rep.final_err << '\n'
                << "final_delta  " << rep.final_delta << '\n';
      if (rep.degenerate_circumcenter) std::cout << "note         degenerate circumcenter encountered\n";
      if (!rep.message.empty()) std::cout << "message      " << rep.message << '\n';
      if (!solve_trace.empty()) {
        std::ofstream f(solve_trace, std::ios::binary | std::ios::trunc);
        if (!f) throw InputError("cannot open '" + solve_trace + "'");
        write_trace_csv(r.trace, f);
      }
      if (rep.status == SolveStatus::Error) throw SolverError("solve failed");
    });
  }

  if (rates->parsed()) {
    return guarded([&] {
      const Instance inst = load_instance(rates_instance);
      RatesOptions opt;
      opt.horizon = rates_horizon;
      opt.threads = rates_threads;
      const std::string id = inst.family + ":" + std::to_string(inst.seed);
      const auto rows = compute_rates(inst, id, parse_method(rates_method), parse_schedule(rates_alpha), opt);
      std::ofstream file;
      write_rates_csv(rows, open_out(rates_out, file));
    });
  }

  if (gen->parsed()) {
    return guarded([&] {
      Instance inst = make_instance(gen_cell.cell());
      if (!gen_no_ref) attach_reference(inst, gen_ref_tol);
      save_instance(inst, gen_out);
    });
  }
  return 0;
}
