#include "halpern/operators.hpp"

#include "halpern/circumcenter.hpp"
#include "halpern/errors.hpp"
#include "halpern/polyhedral_projection.hpp"

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

namespace halpern {

namespace {

void require_bodies(std::span<const ConvexBody> bodies, const Point& x, const char* where,
                    std::size_t min_count = 1) {
  if (bodies.size() < min_count) {
    throw InputError(std::string(where) + ": need at least " + std::to_string(min_count) + " bodies");
  }
  for (const auto& b : bodies) {
    if (b.dim() != x.size()) throw InputError(std::string(where) + ": dimension mismatch");
  }
}

// Runs f(i) for i in [0, count).  Each f writes only its own slot, so the
// result does not depend on the worker count.
template <class F>
void for_each_set(std::size_t count, int threads, F&& f) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  tbb::task_arena arena(threads);
  arena.execute([&] {
    tbb::parallel_for(tbb::blocked_range<std::size_t>(0, count, 1),
                      [&](const tbb::blocked_range<std::size_t>& r) {
                        for (std::size_t i = r.begin(); i != r.end(); ++i) f(i);
                      });
  });
}

bool circ_is_degenerate(const CircumcenterResult& c) {
  return c.degenerate && c.residual > 1e-9 * (1.0 + c.radius);
}

// Exact projection of x onto the intersection of the given cuts.
Point project_onto_cuts(const std::vector<Halfspace>& cuts, const Point& x, double tol) {
  if (cuts.empty()) return x;
  Matrix A(static_cast<Index>(cuts.size()), x.size());
  Vector b(static_cast<Index>(cuts.size()));
  for (std::size_t j = 0; j < cuts.size(); ++j) {
    A.row(static_cast<Index>(j)) = cuts[j].normal().transpose();
    b(static_cast<Index>(j)) = cuts[j].offset();
  }
  return project_onto_rows(A, b, x, tol).point;
}

}  // namespace

std::string_view to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::Map: return "map";
    case OperatorKind::Cimmino: return "cimmino";
    case OperatorKind::ThreePm: return "3pm";
    case OperatorKind::A3pm: return "a3pm";
    case OperatorKind::Sccrm: return "sccrm";
    case OperatorKind::CrmProduct: return "crm";
  }
  return "?";
}

OperatorKind parse_operator_kind(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "map") return OperatorKind::Map;
  if (s == "cimmino") return OperatorKind::Cimmino;
  if (s == "3pm") return OperatorKind::ThreePm;
  if (s == "a3pm") return OperatorKind::A3pm;
  if (s == "sccrm") return OperatorKind::Sccrm;
  if (s == "crm" || s == "crm_product") return OperatorKind::CrmProduct;
  throw InputError("unknown operator '" + std::string(name) + "'");
}

OperatorEvaluation apply_map(std::span<const ConvexBody> bodies, const Point& x,
                             const OperatorOptions& opt) {
  require_bodies(bodies, x, "apply_map");
  OperatorEvaluation out;
  out.per_set_projections.reserve(bodies.size());
  Point p = x;
  for (const auto& body : bodies) {
    p = project(body, p, opt.tol);
    out.per_set_projections.push_back(p);
  }
  out.output = std::move(p);
  return out;
}

OperatorEvaluation apply_cimmino(std::span<const ConvexBody> bodies, const Point& x,
                                 const OperatorOptions& opt) {
  require_bodies(bodies, x, "apply_cimmino");
  OperatorEvaluation out;
  out.per_set_projections.assign(bodies.size(), Point());
  for_each_set(bodies.size(), opt.threads,
               [&](std::size_t i) { out.per_set_projections[i] = project(bodies[i], x, opt.tol); });
  Point sum = Point::Zero(x.size());
  for (const auto& p : out.per_set_projections) sum += p;
  out.output = sum / static_cast<double>(bodies.size());
  return out;
}

OperatorEvaluation apply_3pm(std::span<const ConvexBody> bodies, const Point& x,
                             const OperatorOptions& opt) {
  require_bodies(bodies, x, "apply_3pm");
  OperatorEvaluation out;
  out.per_set_projections.assign(bodies.size(), Point());
  for_each_set(bodies.size(), opt.threads,
               [&](std::size_t i) { out.per_set_projections[i] = project(bodies[i], x, opt.tol); });

  std::vector<Halfspace> cuts;
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    const Point& p = out.per_set_projections[i];
    const Vector normal = x - p;
    if (!(normal.norm() > 0.0)) continue;  // x in U_i: no separating halfspace
    cuts.emplace_back(normal, normal.dot(p));
  }
  out.output = project_onto_cuts(cuts, x, opt.tol);
  return out;
}

OperatorEvaluation apply_a3pm(std::span<const ConvexBody> bodies, const Point& x,
                              const OperatorOptions& opt) {
  require_bodies(bodies, x, "apply_a3pm");
  std::vector<SublevelStep> steps(bodies.size());
  for_each_set(bodies.size(), opt.threads, [&](std::size_t i) {
    steps[i] = approx_project_sublevel(bodies[i], x, opt.measure_epsilon);
  });

  OperatorEvaluation out;
  std::vector<Halfspace> cuts;
  double eps = 0.0;
  for (auto& st : steps) {
    if (st.cut) cuts.push_back(*st.cut);
    if (st.measured_epsilon) eps = std::max(eps, *st.measured_epsilon);
    out.per_set_projections.push_back(std::move(st.point));
  }
  if (opt.measure_epsilon) out.measured_epsilon = eps;
  out.output = project_onto_cuts(cuts, x, opt.tol);
  return out;
}

Point sccrm_pair_step(const ConvexBody& a, const ConvexBody& b, const Point& x, double tol,
                      bool* degenerate) {
  const Point z = project(a, project(b, x, tol), tol);
  const Point w = 0.5 * (project(a, z, tol) + project(b, z, tol));
  const Point ra = 2.0 * project(a, w, tol) - w;
  const Point rb = 2.0 * project(b, w, tol) - w;
  const CircumcenterResult c = circumcenter({w, ra, rb});
  if (degenerate && circ_is_degenerate(c)) *degenerate = true;
  return c.center;
}

OperatorEvaluation apply_sccrm_cycle(std::span<const ConvexBody> bodies, const Point& x,
                                     const OperatorOptions& opt) {
  require_bodies(bodies, x, "apply_sccrm_cycle", 2);
  std::vector<std::pair<std::size_t, std::size_t>> pairs = opt.sccrm_pairs;
  if (pairs.empty()) {
    for (std::size_t k = 0; k + 1 < bodies.size(); ++k) pairs.emplace_back(k + 1, k);
  }
  OperatorEvaluation out;
  Point y = x;
  for (const auto& [r, l] : pairs) {
    if (r >= bodies.size() || l >= bodies.size()) throw InputError("apply_sccrm_cycle: pair index out of range");
    bool degenerate = false;
    y = sccrm_pair_step(bodies[r], bodies[l], y, opt.tol, &degenerate);
    out.degenerate_circumcenter = out.degenerate_circumcenter || degenerate;
  }
  out.output = std::move(y);
  return out;
}

Point embed_diagonal(const Point& x, std::size_t copies) {
  if (copies == 0) throw InputError("embed_diagonal: zero copies");
  return x.replicate(static_cast<Index>(copies), 1);
}

Point block_average(const Point& z, std::size_t copies) {
  if (copies == 0 || z.size() % static_cast<Index>(copies) != 0) {
    throw InputError("block_average: size is not a multiple of the block count");
  }
  const Index n = z.size() / static_cast<Index>(copies);
  Point avg = Point::Zero(n);
  for (std::size_t i = 0; i < copies; ++i) avg += z.segment(static_cast<Index>(i) * n, n);
  return avg / static_cast<double>(copies);
}

double diagonal_defect(const Point& z, std::size_t copies) {
  const Point avg = block_average(z, copies);
  const Index n = avg.size();
  double worst = 0.0;
  for (std::size_t i = 0; i < copies; ++i) {
    worst = std::max(worst, (z.segment(static_cast<Index>(i) * n, n) - avg).cwiseAbs().maxCoeff());
  }
  return worst;
}

OperatorEvaluation apply_crm_product(std::span<const ConvexBody> bodies, const Point& z,
                                     const OperatorOptions& opt) {
  const std::size_t m = bodies.size();
  if (m == 0) throw InputError("apply_crm_product: need at least one body");
  const Index n = bodies.front().dim();
  for (const auto& b : bodies) {
    if (b.dim() != n) throw InputError("apply_crm_product: bodies have different dimensions");
  }
  if (z.size() != n * static_cast<Index>(m)) throw InputError("apply_crm_product: z has wrong size");
  const double scale = std::max(1.0, z.cwiseAbs().maxCoeff());
  if (diagonal_defect(z, m) > 1e-9 * scale) {
    throw ContractError("apply_crm_product: input is not on the diagonal");
  }

  OperatorEvaluation out;
  out.per_set_projections.assign(m, Point());
  for_each_set(m, opt.threads, [&](std::size_t i) {
    out.per_set_projections[i] = project(bodies[i], z.segment(static_cast<Index>(i) * n, n), opt.tol);
  });

  Point pw(z.size());
  for (std::size_t i = 0; i < m; ++i) pw.segment(static_cast<Index>(i) * n, n) = out.per_set_projections[i];
  const Point rw = 2.0 * pw - z;
  const Point rdrw = 2.0 * embed_diagonal(block_average(rw, m), m) - rw;
  const CircumcenterResult c = circumcenter({z, rw, rdrw});
  out.degenerate_circumcenter = circ_is_degenerate(c);

  const double out_scale = std::max(1.0, c.center.cwiseAbs().maxCoeff());
  const double defect = diagonal_defect(c.center, m);
  if (defect > 1e-8 * out_scale) {
    throw SolverError("apply_crm_product: circumcenter left the diagonal (defect " +
                      std::to_string(defect) + ")");
  }
  out.output = embed_diagonal(block_average(c.center, m), m);
  return out;
}

OperatorEvaluation apply_operator(OperatorKind kind, std::span<const ConvexBody> bodies,
                                  const Point& x, const OperatorOptions& opt) {
  switch (kind) {
    case OperatorKind::Map: return apply_map(bodies, x, opt);
    case OperatorKind::Cimmino: return apply_cimmino(bodies, x, opt);
    case OperatorKind::ThreePm: return apply_3pm(bodies, x, opt);
    case OperatorKind::A3pm: return apply_a3pm(bodies, x, opt);
    case OperatorKind::Sccrm: return apply_sccrm_cycle(bodies, x, opt);
    case OperatorKind::CrmProduct: return apply_crm_product(bodies, x, opt);
  }
  throw InputError("apply_operator: unknown kind");
}

double decrease_constant(OperatorKind kind, std::size_t m, double measured_epsilon) {
  if (m == 0) throw InputError("decrease_constant: m must be positive");
  switch (kind) {
    case OperatorKind::Map:
    case OperatorKind::Cimmino:
    case OperatorKind::Sccrm:
      return 1.0 / static_cast<double>(m);
    case OperatorKind::ThreePm:
    case OperatorKind::CrmProduct:
      return 1.0;
    case OperatorKind::A3pm:
      return std::pow(1.0 - measured_epsilon, 4);
  }
  return 0.0;
}

double check_decrease(OperatorKind kind, std::span<const ConvexBody> bodies, const Point& x,
                      const Point& s, double tol, const OperatorOptions& opt) {
  require_bodies(bodies, x, "check_decrease");
  if (s.size() != x.size()) throw InputError("check_decrease: dimension mismatch");
  const double ds = violation_delta(bodies, s, opt.tol);
  if (ds > tol) {
    throw InputError("check_decrease: s is not feasible (delta " + std::to_string(ds) + ")");
  }

  if (kind == OperatorKind::CrmProduct) {
    const std::size_t m = bodies.size();
    const Point z = embed_diagonal(x, m);
    const Point sz = embed_diagonal(s, m);
    const OperatorEvaluation ev = apply_crm_product(bodies, z, opt);
    double dist_w2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) dist_w2 += (x - ev.per_set_projections[i]).squaredNorm();
    return (z - sz).squaredNorm() - (ev.output - sz).squaredNorm() - dist_w2;
  }

  OperatorOptions local = opt;
  if (kind == OperatorKind::A3pm) local.measure_epsilon = true;
  const OperatorEvaluation ev = apply_operator(kind, bodies, x, local);
  const double c0 = decrease_constant(kind, bodies.size(), ev.measured_epsilon.value_or(0.0));
  const double delta = violation_delta(bodies, x, opt.tol);
  return (x - s).squaredNorm() - (ev.output - s).squaredNorm() - c0 * delta * delta;
}

}  // namespace halpern
