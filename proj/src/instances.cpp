#include "halpern/instances.hpp"

#include "halpern/drivers.hpp"
#include "halpern/errors.hpp"
#include "halpern/interior_point.hpp"
#include "halpern/polyhedral_projection.hpp"
#include "halpern/rng.hpp"

#include <cmath>

namespace halpern {

namespace {

Vector uniform_vector(CounterRng& rng, Index n, double lo, double hi) {
  Vector v(n);
  for (Index j = 0; j < n; ++j) v(j) = rng.uniform(lo, hi);
  return v;
}

Matrix uniform_matrix(CounterRng& rng, Index rows, Index cols, double lo, double hi) {
  Matrix a(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) a(i, j) = rng.uniform(lo, hi);
  }
  return a;
}

// Largest t with t v on the boundary of the ellipsoid; the origin is inside.
double exit_parameter(const Ellipsoid& e, const Vector& v) {
  const Vector qv = e.shape() * v;
  const Vector qy = e.shape() * e.center();
  const double a = v.dot(qv);
  const double b = -2.0 * v.dot(qy);
  const double c = e.center().dot(qy) - e.radius() * e.radius();
  return (-b + std::sqrt(b * b - 4.0 * a * c)) / (2.0 * a);
}

}  // namespace

Instance gen_ellipsoid_instance(Index m, Index n, double theta, std::uint64_t seed) {
  if (m < 1 || n < 1) throw InputError("gen_ellipsoid_instance: m and n must be >= 1");
  if (!(theta > 0.0)) throw InputError("gen_ellipsoid_instance: theta must be > 0");
  CounterRng rng(seed);
  Instance inst;
  inst.family = "ellipsoid";
  inst.m = m;
  inst.n = n;
  inst.theta = theta;
  inst.seed = seed;
  inst.bodies.reserve(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) {
    Vector y = uniform_vector(rng, n, -1.0, 1.0);
    const Matrix A = uniform_matrix(rng, n, n, -1.0, 1.0);
    const double lambda = rng.uniform(0.1, 1.1);
    Matrix Q = A * A.transpose();
    Q = 0.5 * (Q + Q.transpose());
    Q.diagonal().array() += lambda;
    const double qnorm = Eigen::SelfAdjointEigenSolver<Matrix>(Q, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
    const double eta = (theta + y.norm()) * std::sqrt(qnorm);
    inst.bodies.emplace_back(Ellipsoid(std::move(y), std::move(Q), eta));
  }

  Vector v = uniform_vector(rng, n, -1.0, 1.0);
  if (!(v.norm() > 0.0)) v = Vector::Ones(n);
  double t_max = 0.0;
  for (const auto& b : inst.bodies) t_max = std::max(t_max, exit_parameter(*b.get_if<Ellipsoid>(), v));
  inst.anchor = (t_max * (1.0 + rng.uniform(0.1, 1.0))) * v;
  inst.witness = Point::Zero(n);
  return inst;
}

Instance gen_polyhedron_instance(Index m, Index n, Index k, double alpha, std::uint64_t seed) {
  if (m < 1 || n < 1 || k < 1) throw InputError("gen_polyhedron_instance: m, n, k must be >= 1");
  if (!(alpha >= 0.0)) throw InputError("gen_polyhedron_instance: alpha must be >= 0");
  CounterRng rng(seed);
  Instance inst;
  inst.family = "polyhedron";
  inst.m = m;
  inst.n = n;
  inst.k = k;
  inst.alpha = alpha;
  inst.seed = seed;

  const Matrix A = uniform_matrix(rng, k, n, -1.0, 1.0);
  const Vector xstar = uniform_vector(rng, n, -1.0, 1.0);
  const Vector axs = A * xstar;
  for (Index i = 0; i < m; ++i) {
    const Vector xi = uniform_vector(rng, k, 0.0, 1.0);
    inst.bodies.emplace_back(Polyhedron(A, axs + alpha * xi));
  }
  inst.witness = xstar;

  for (int attempt = 0; attempt < 10000; ++attempt) {
    Vector x0 = uniform_vector(rng, n, -2.0, 2.0);
    if (violation_delta(inst.bodies, x0) > 1e-6) {
      inst.anchor = std::move(x0);
      return inst;
    }
  }
  throw InstanceError("gen_polyhedron_instance: could not draw an infeasible anchor");
}

Point construction_witness(const Instance& instance) {
  if (instance.witness) return *instance.witness;
  throw InputError("construction_witness: instance carries no witness");
}

ReferenceReport reference_projection(const Instance& instance, const Point& anchor, double tol,
                                     const ReferenceOptions& opt) {
  if (!(tol > 0.0) || tol > 1e-6) throw InputError("reference_projection: tol must be in (0, 1e-6]");
  const std::span<const ConvexBody> bodies(instance.bodies);
  if (bodies.empty()) throw InputError("reference_projection: no bodies");

  ReferenceReport rep;
  const DykstraOracleResult a =
      dykstra_to_tolerance(bodies, anchor, tol / 10.0, tol / 10.0, opt.max_dykstra_cycles, opt.wall_limit);
  rep.dykstra_cycles = a.iterations;
  if (!a.converged) {
    throw OracleError("reference_projection: Dykstra stopped after " + std::to_string(a.iterations) +
                      " cycles (delta " + std::to_string(a.delta) + ", movement " +
                      std::to_string(a.movement) + ")");
  }

  InteriorPointOptions ipo;
  const InteriorPointResult b = interior_point_projection(bodies, anchor, ipo);
  rep.interior_point_iterations = b.iterations;
  if (!b.converged) {
    throw OracleError("reference_projection: interior-point route did not converge (dual residual " +
                      std::to_string(b.dual_residual) + ")");
  }

  rep.point = a.point;
  rep.second_route = b.point;
  rep.disagreement = (a.point - b.point).norm();
  rep.certified_tol = std::max(rep.disagreement, a.delta);
  if (rep.disagreement > tol) {
    throw OracleError("reference_projection: routes disagree by " + std::to_string(rep.disagreement));
  }
  return rep;
}

ReferenceReport reference_projection(const Instance& instance, double tol, const ReferenceOptions& opt) {
  return reference_projection(instance, instance.anchor, tol, opt);
}

void attach_reference(Instance& instance, double tol, const ReferenceOptions& opt) {
  const ReferenceReport r = reference_projection(instance, tol, opt);
  instance.reference = ReferenceSolution{r.point, r.certified_tol};
}

double kkt_normal_cone_residual(const Instance& instance, const Point& s, double active_tol) {
  std::vector<Vector> normals;
  for (const auto& body : instance.bodies) {
    if (const auto* h = body.get_if<Halfspace>()) {
      const double nn = h->normal().norm();
      if (-h->residual(s) / nn <= active_tol) normals.push_back(h->normal() / nn);
    } else if (const auto* p = body.get_if<Polyhedron>()) {
      for (Index j = 0; j < p->row_count(); ++j) {
        const double nn = p->rows().row(j).norm();
        const double slack = (p->rhs()(j) - p->rows().row(j).dot(s)) / nn;
        if (slack <= active_tol) normals.push_back(p->rows().row(j).transpose() / nn);
      }
    } else if (const auto* e = body.get_if<Ellipsoid>()) {
      const Vector grad = 2.0 * (e->shape() * (s - e->center()));
      const double gn = grad.norm();
      if (gn > 0.0 && -e->residual(s) / gn <= active_tol) normals.push_back(grad / gn);
    } else {
      throw InputError("kkt_normal_cone_residual: unsupported body kind");
    }
  }
  const Vector r = instance.anchor - s;
  const double denom = std::max(1.0, r.norm());
  if (normals.empty()) return r.norm() / denom;
  Matrix N(s.size(), static_cast<Index>(normals.size()));
  for (std::size_t j = 0; j < normals.size(); ++j) N.col(static_cast<Index>(j)) = normals[j];
  return nnls(N, r).residual_norm / denom;
}

}  // namespace halpern
