#include "halpern/bench.hpp"

#include "halpern/errors.hpp"

#include <json.hpp>

#include <atomic>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace halpern {

namespace {

using json = nlohmann::json;

std::string fmt_real(double v) {
  if (std::isnan(v)) return "NA";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt_real(*v) : "NA"; }

}  // namespace

std::string bench_csv_header() {
  return "method,family,m,n,k,theta,schedule,seed,iterations,wall_time_s,final_err,final_delta,status";
}

MethodSpec parse_method(const std::string& name) {
  MethodSpec spec;
  spec.label = name;
  if (name == "dykstra") {
    spec.dykstra = true;
    return spec;
  }
  std::string base = name;
  constexpr std::string_view suffix = "_par";
  if (base.size() > suffix.size() && base.compare(base.size() - suffix.size(), suffix.size(), suffix) == 0) {
    base.resize(base.size() - suffix.size());
    spec.parallel = true;
  }
  spec.kind = parse_operator_kind(base);
  if (spec.parallel && spec.kind != OperatorKind::Cimmino && spec.kind != OperatorKind::A3pm) {
    throw InputError("method '" + name + "': only cimmino and a3pm have parallel variants");
  }
  return spec;
}

void BenchmarkPlan::validate() const {
  if (methods.empty() && !cells.empty()) throw InputError("plan lists no methods");
  for (const auto& m : methods) parse_method(m);
  bool needs_schedule = false;
  for (const auto& m : methods) needs_schedule = needs_schedule || m != "dykstra";
  if (needs_schedule && schedules.empty()) throw InputError("plan lists no schedules");
  for (const auto& c : cells) {
    if (c.family != "ellipsoid" && c.family != "polyhedron") {
      throw InputError("plan cell has unknown family '" + c.family + "'");
    }
    if (c.m < 1 || c.n < 1 || (c.family == "polyhedron" && c.k < 1)) {
      throw InputError("plan cell has non-positive dimensions");
    }
  }
  if (!(err_tol > 0.0)) throw InputError("plan err_tol must be > 0");
  if (threads < 1) throw InputError("plan threads must be >= 1");
  if (!(reference_tol > 0.0 && reference_tol <= 1e-6)) throw InputError("plan reference_tol must be in (0, 1e-6]");
}

BenchmarkPlan plan_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError("plan parse error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  if (!j.is_object()) throw InputError("plan must be a JSON object");
  BenchmarkPlan plan;
  try {
    plan.err_tol = j.value("err_tol", plan.err_tol);
    plan.time_limit = j.value("time_limit", plan.time_limit);
    plan.max_iters = j.value("max_iters", plan.max_iters);
    plan.threads = j.value("threads", plan.threads);
    plan.reference_tol = j.value("reference_tol", plan.reference_tol);
    plan.omit_timing = j.value("omit_timing", plan.omit_timing);
    for (const auto& m : j.value("methods", json::array())) plan.methods.push_back(m.get<std::string>());
    for (const auto& s : j.value("schedules", json::array())) plan.schedules.push_back(parse_schedule(s.get<std::string>()));
    const json cells = j.value("cells", json::array());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const json& c = cells[i];
      BenchCell cell;
      cell.family = c.at("family").get<std::string>();
      cell.m = c.at("m").get<Index>();
      cell.n = c.at("n").get<Index>();
      cell.k = c.value("k", Index{0});
      cell.theta = c.value("theta", 1.0);
      cell.spread = c.value("spread", 0.5);
      cell.seed = c.at("seed").get<std::uint64_t>();
      plan.cells.push_back(cell);
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("plan schema error: ") + e.what());
  }
  plan.validate();
  return plan;
}

BenchmarkPlan load_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open plan '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return plan_from_json(buf.str());
}

Instance make_instance(const BenchCell& cell) {
  if (cell.family == "ellipsoid") return gen_ellipsoid_instance(cell.m, cell.n, cell.theta, cell.seed);
  if (cell.family == "polyhedron") return gen_polyhedron_instance(cell.m, cell.n, cell.k, cell.spread, cell.seed);
  throw InputError("unknown family '" + cell.family + "'");
}

SolveResult run_method(const Instance& instance, const MethodSpec& method, const StepSchedule& schedule,
                       const StopRule& stop, int threads, const TraceOptions& trace) {
  SolveOptions opt;
  opt.trace = trace;
  opt.op.threads = method.parallel ? std::max(1, threads) : 1;
  SolveResult r = method.dykstra ? dykstra_solve(instance, stop, opt)
                                 : halpern_solve(instance, method.kind, schedule, stop, opt);
  r.report.method = method.label;
  return r;
}

namespace {

std::string format_row(const std::string& method, const BenchCell& cell, const std::string& schedule,
                       const SolveReport* rep, bool omit_timing, const char* status_override = nullptr) {
  std::ostringstream os;
  os << method << ',' << cell.family << ',' << cell.m << ',' << cell.n << ',' << cell.k << ','
     << fmt_real(cell.family == "ellipsoid" ? cell.theta : std::nan("")) << ',' << schedule << ','
     << cell.seed << ',';
  if (rep) {
    os << rep->iterations << ',' << (omit_timing ? std::string("NA") : fmt_real(rep->wall_time_s)) << ','
       << fmt_real(rep->final_err) << ',' << fmt_real(rep->final_delta) << ',' << to_string(rep->status);
  } else {
    os << "0,NA,NA,NA," << (status_override ? status_override : "ERROR");
  }
  return os.str();
}

std::vector<std::string> run_cell(const BenchmarkPlan& plan, const BenchCell& cell) {
  std::vector<std::string> rows;
  Instance inst;
  std::string failure;
  try {
    inst = make_instance(cell);
    attach_reference(inst, plan.reference_tol);
  } catch (const std::exception& e) {
    failure = e.what();
  }

  StopRule stop;
  stop.err_tol = plan.err_tol;
  stop.max_iters = plan.max_iters;
  stop.wall_limit = plan.time_limit;
  TraceOptions trace;
  trace.enabled = false;

  for (const auto& name : plan.methods) {
    const MethodSpec method = parse_method(name);
    std::vector<std::string> labels;
    if (method.dykstra) {
      labels.push_back("none");
    } else {
      for (const auto& s : plan.schedules) labels.push_back(s.label());
    }
    for (std::size_t si = 0; si < labels.size(); ++si) {
      if (!failure.empty()) {
        rows.push_back(format_row(name, cell, labels[si], nullptr, plan.omit_timing));
        continue;
      }
      const StepSchedule sched = method.dykstra ? StepSchedule::inv_k() : plan.schedules[si];
      const SolveResult r = run_method(inst, method, sched, stop, plan.threads, trace);
      rows.push_back(format_row(name, cell, labels[si], &r.report, plan.omit_timing));
    }
  }
  return rows;
}

}  // namespace

void run_bench(const BenchmarkPlan& plan, std::ostream& out) {
  plan.validate();
  out << bench_csv_header() << '\n';
  out.flush();
  const std::size_t ncell = plan.cells.size();
  if (ncell == 0) return;

  std::vector<std::optional<std::vector<std::string>>> done(ncell);
  std::mutex mu;
  std::size_t next_flush = 0;
  std::atomic<std::size_t> next_cell{0};

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next_cell.fetch_add(1);
      if (i >= ncell) return;
      std::vector<std::string> rows = run_cell(plan, plan.cells[i]);
      std::lock_guard<std::mutex> lock(mu);
      done[i] = std::move(rows);
      while (next_flush < ncell && done[next_flush]) {
        for (const auto& r : *done[next_flush]) out << r << '\n';
        done[next_flush].reset();
        ++next_flush;
      }
      out.flush();
    }
  };

  const int workers = std::min<int>(plan.threads, static_cast<int>(ncell));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
}

void write_trace_csv(const IterationTrace& trace, std::ostream& out) {
  out << "k,alpha,delta,err,time_s\n";
  for (const auto& r : trace.rows) {
    out << r.k << ',' << fmt_real(r.alpha) << ',' << fmt_real(r.delta) << ',' << fmt_real(r.err) << ','
        << fmt_real(r.time_s) << '\n';
  }
}

std::vector<RatesRow> rates_from_trace(const Instance& instance, const std::string& instance_id,
                                       const MethodSpec& method, const StepSchedule& schedule,
                                       const IterationTrace& trace, const GammaProbe& probe,
                                       const RatesOptions& opt) {
  if (!instance.reference) throw InputError("rates: instance has no reference solution");
  if (method.dykstra) throw InputError("rates: dykstra has no stepsize schedule");
  const Point& sstar = instance.reference->point;

  std::map<long, double> alpha_at;
  double eps_max = 0.0;
  for (const auto& r : trace.rows) {
    if (r.k >= 1) alpha_at[r.k] = r.alpha;
    if (std::isfinite(r.eps_hat)) eps_max = std::max(eps_max, r.eps_hat);
  }

  // dist(x_k, S) at roughly log-spaced stored iterates.
  RateSeries dist;
  if (!trace.iterates.empty()) {
    const long kmax = trace.iterates.back().k;
    const int points = std::max(2, opt.distance_points);
    long last_k = 0;
    std::size_t cursor = 0;
    for (int j = 0; j < points; ++j) {
      const double target = std::pow(static_cast<double>(kmax), static_cast<double>(j) / (points - 1));
      while (cursor < trace.iterates.size() && static_cast<double>(trace.iterates[cursor].k) < target) ++cursor;
      if (cursor >= trace.iterates.size()) cursor = trace.iterates.size() - 1;
      const StoredIterate& it = trace.iterates[cursor];
      if (it.k <= last_k || it.k < 1) continue;
      last_k = it.k;
      const auto a = alpha_at.find(it.k);
      if (a == alpha_at.end()) continue;
      dist.push(it.k, a->second, fast_distance_to_S(instance, it.x).distance);
    }
  }
  const RateSeries err = err_series(trace);

  const double g = probe.gamma_hat;
  HolderParams params{g, std::max(1.0, probe.c_hat)};
  const double c0 = decrease_constant(method.kind, instance.bodies.size(), eps_max);
  const double d0 = (instance.anchor - sstar).norm();
  const TheoremBounds tb = theorem_bounds(params, std::min(1.0, c0), d0, schedule);

  std::vector<RatesRow> rows;
  if (dist.size() >= 2) {
    const RateEstimate e = fit_rate(dist, g / (2.0 - g), opt.tail_fraction);
    rows.push_back({instance_id, method.label, schedule.label(), "dist", e.exponent, e.k1, e.k2,
                    e.tail_sup, e.slope, tb.thm33});
  }
  if (err.size() >= 2) {
    const RateEstimate e = fit_rate(err, g / (4.0 - 2.0 * g), opt.tail_fraction);
    rows.push_back({instance_id, method.label, schedule.label(), "err", e.exponent, e.k1, e.k2,
                    e.tail_sup, e.slope, tb.thm34});
  }
  return rows;
}

std::vector<RatesRow> compute_rates(const Instance& instance, const std::string& instance_id,
                                    const MethodSpec& method, const StepSchedule& schedule,
                                    const RatesOptions& opt) {
  if (opt.horizon < 100) throw InputError("rates: horizon must be >= 100");
  if (!instance.reference) throw InputError("rates: instance has no reference solution");
  StopRule stop;
  stop.stop_on_target = false;
  stop.max_iters = opt.horizon;
  stop.wall_limit = 0.0;
  TraceOptions trace;
  trace.store_iterates = true;
  trace.record_delta = false;
  const SolveResult r = run_method(instance, method, schedule, stop, opt.threads, trace);
  if (r.report.status == SolveStatus::Error) throw SolverError("rates: solve failed: " + r.report.message);

  ProbeOptions po;
  po.samples = opt.probe_samples;
  po.seed = opt.probe_seed;
  const GammaProbe probe = probe_gamma(instance, po);
  return rates_from_trace(instance, instance_id, method, schedule, r.trace, probe, opt);
}

void write_rates_csv(const std::vector<RatesRow>& rows, std::ostream& out) {
  out << "instance,method,schedule,series,exponent,k1,k2,tail_sup,theoretical_bound,slope\n";
  for (const auto& r : rows) {
    out << r.instance_id << ',' << r.method << ',' << r.schedule << ',' << r.series << ','
        << fmt_real(r.exponent) << ',' << r.k1 << ',' << r.k2 << ',' << fmt_real(r.tail_sup) << ','
        << fmt_opt(r.bound) << ',' << fmt_real(r.slope) << '\n';
  }
}

}  // namespace halpern
