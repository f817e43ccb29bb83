#pragma once

#include "halpern/analysis.hpp"
#include "halpern/drivers.hpp"
#include "halpern/instances.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace halpern {

/// Column set of the benchmark CSV; bump the version when it changes.
inline constexpr int kBenchCsvVersion = 1;
std::string bench_csv_header();

struct MethodSpec {
  std::string label;  // map, cimmino, cimmino_par, 3pm, a3pm, a3pm_par, sccrm, crm, dykstra
  bool dykstra = false;
  bool parallel = false;
  OperatorKind kind = OperatorKind::Map;
};

MethodSpec parse_method(const std::string& name);

struct BenchCell {
  std::string family;  // ellipsoid | polyhedron
  Index m = 0, n = 0, k = 0;
  double theta = 1.0;
  double spread = 0.5;  // polyhedral alpha
  std::uint64_t seed = 0;
};

struct BenchmarkPlan {
  std::vector<BenchCell> cells;
  std::vector<std::string> methods;
  std::vector<StepSchedule> schedules;
  double err_tol = 1e-2;
  double time_limit = 60.0;
  long max_iters = 1'000'000;
  int threads = 1;
  double reference_tol = 1e-7;
  /// Write wall_time_s as NA so reruns are byte-identical.
  bool omit_timing = false;

  void validate() const;
};

BenchmarkPlan plan_from_json(const std::string& text);
BenchmarkPlan load_plan(const std::filesystem::path& path);

Instance make_instance(const BenchCell& cell);

SolveResult run_method(const Instance& instance, const MethodSpec& method, const StepSchedule& schedule,
                       const StopRule& stop, int threads, const TraceOptions& trace = {});

/// Runs every (cell, method, schedule) triple; Dykstra runs once per cell with
/// schedule "none".  Cells are spread over `plan.threads` workers and rows are
/// written in plan order, flushed as soon as the prefix is complete.
void run_bench(const BenchmarkPlan& plan, std::ostream& out);

/// k, alpha, delta, err, time_s
void write_trace_csv(const IterationTrace& trace, std::ostream& out);

struct RatesRow {
  std::string instance_id, method, schedule, series;
  double exponent = 0.0;
  long k1 = 0, k2 = 0;
  double tail_sup = 0.0;
  double slope = 0.0;
  std::optional<double> bound;
};

struct RatesOptions {
  long horizon = 10000;
  int threads = 1;
  std::size_t probe_samples = 60;
  std::uint64_t probe_seed = 1;
  double tail_fraction = 0.5;
  int distance_points = 40;  // log-spaced iterations where dist(x_k, S) is estimated
};

/// Runs to the horizon without the error stop and fits both rate ratios.
std::vector<RatesRow> compute_rates(const Instance& instance, const std::string& instance_id,
                                    const MethodSpec& method, const StepSchedule& schedule,
                                    const RatesOptions& opt);

/// Same, from an existing trace (iterates must be stored) and probe result.
std::vector<RatesRow> rates_from_trace(const Instance& instance, const std::string& instance_id,
                                       const MethodSpec& method, const StepSchedule& schedule,
                                       const IterationTrace& trace, const GammaProbe& probe,
                                       const RatesOptions& opt);

void write_rates_csv(const std::vector<RatesRow>& rows, std::ostream& out);

}  // namespace halpern
