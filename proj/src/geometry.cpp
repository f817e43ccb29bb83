#include "halpern/geometry.hpp"

#include "halpern/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace halpern {

namespace {

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw InputError(std::string(what) + " has non-finite entries");
}

void require_dim(Index expected, const Point& x, const char* where) {
  if (x.size() != expected) {
    throw InputError(std::string(where) + ": dimension mismatch (expected " +
                     std::to_string(expected) + ", got " + std::to_string(x.size()) + ")");
  }
}

}  // namespace

Halfspace::Halfspace(Vector normal, double offset) : normal_(std::move(normal)), offset_(offset) {
  require_finite(normal_, "halfspace normal");
  if (!std::isfinite(offset_)) throw InstanceError("halfspace offset is not finite");
  if (!(normal_.norm() > 0.0)) throw InstanceError("halfspace normal must be nonzero");
}

Polyhedron::Polyhedron(Matrix rows, Vector rhs) : rows_(std::move(rows)), rhs_(std::move(rhs)) {
  if (rows_.rows() < 1) throw InstanceError("polyhedron needs at least one row");
  if (rows_.rows() != rhs_.size()) throw InstanceError("polyhedron rows/rhs size mismatch");
  if (!rows_.allFinite() || !rhs_.allFinite()) throw InstanceError("polyhedron has non-finite data");
  for (Index j = 0; j < rows_.rows(); ++j) {
    if (!(rows_.row(j).norm() > 0.0)) {
      throw InstanceError("polyhedron row " + std::to_string(j) + " has zero norm");
    }
  }
}

double Polyhedron::residual(const Point& x) const { return (rows_ * x - rhs_).maxCoeff(); }

Ellipsoid::Ellipsoid(Vector center, Matrix shape, double radius)
    : center_(std::move(center)), shape_(std::move(shape)), radius_(radius) {
  const Index n = center_.size();
  require_finite(center_, "ellipsoid center");
  if (shape_.rows() != n || shape_.cols() != n) throw InstanceError("ellipsoid shape has wrong size");
  if (!shape_.allFinite()) throw InstanceError("ellipsoid shape has non-finite entries");
  if (!(radius_ > 0.0) || !std::isfinite(radius_)) throw InstanceError("ellipsoid radius must be > 0");
  const double scale = std::max(1.0, shape_.cwiseAbs().maxCoeff());
  if ((shape_ - shape_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw InstanceError("ellipsoid shape is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(shape_);
  if (eig.info() != Eigen::Success) throw InstanceError("ellipsoid eigendecomposition failed");
  eigenvalues_ = eig.eigenvalues();
  eigenvectors_ = eig.eigenvectors();
  if (!(eigenvalues_.minCoeff() > 0.0)) throw InstanceError("ellipsoid shape is not positive definite");
}

double Ellipsoid::residual(const Point& x) const {
  const Vector d = x - center_;
  return d.dot(shape_ * d) - radius_ * radius_;
}

Ball::Ball(Vector center, double radius) : center_(std::move(center)), radius_(radius) {
  require_finite(center_, "ball center");
  if (!(radius_ >= 0.0) || !std::isfinite(radius_)) throw InstanceError("ball radius must be >= 0");
}

ProductBody::ProductBody(std::vector<ConvexBody> blocks) : blocks_(std::move(blocks)) {
  if (blocks_.empty()) throw InstanceError("product body needs at least one block");
  offsets_.reserve(blocks_.size());
  for (const auto& b : blocks_) {
    offsets_.push_back(dim_);
    dim_ += b.dim();
  }
}

DiagonalSubspace::DiagonalSubspace(Index block_dim, Index copies)
    : block_dim_(block_dim), copies_(copies) {
  if (block_dim_ < 1 || copies_ < 1) throw InstanceError("diagonal subspace needs positive sizes");
}

Index ConvexBody::dim() const {
  return std::visit([](const auto& b) { return b.dim(); }, body_);
}

std::string_view ConvexBody::kind_name() const {
  struct Namer {
    std::string_view operator()(const Halfspace&) const { return "halfspace"; }
    std::string_view operator()(const Polyhedron&) const { return "polyhedron"; }
    std::string_view operator()(const Ellipsoid&) const { return "ellipsoid"; }
    std::string_view operator()(const Ball&) const { return "ball"; }
    std::string_view operator()(const ProductBody&) const { return "product"; }
    std::string_view operator()(const DiagonalSubspace&) const { return "diagonal"; }
  };
  return std::visit(Namer{}, body_);
}

Point project_halfspace(const Halfspace& h, const Point& x) {
  require_dim(h.dim(), x, "project_halfspace");
  const double excess = h.residual(x);
  if (excess <= 0.0) return x;
  return x - (excess / h.normal().squaredNorm()) * h.normal();
}

Point project_ball(const Ball& b, const Point& x) {
  require_dim(b.dim(), x, "project_ball");
  const Vector d = x - b.center();
  const double r = d.norm();
  if (r <= b.radius()) return x;
  return b.center() + (b.radius() / r) * d;
}

Point project_ellipsoid(const Ellipsoid& e, const Point& x, double tol) {
  require_dim(e.dim(), x, "project_ellipsoid");
  if (!(tol > 0.0)) throw InputError("project_ellipsoid: tol must be positive");
  if (e.residual(x) <= kMembershipTol) return x;

  const Vector& lam = e.eigenvalues();
  const Vector dt = e.eigenvectors().transpose() * (x - e.center());
  const double eta2 = e.radius() * e.radius();

  // s(mu) = sum lam_j dt_j^2 / (1 + mu lam_j)^2 is decreasing; we want s(mu) = eta^2.
  // Newton runs on 1/eta - 1/sqrt(s(mu)), which is close to linear in mu.
  auto eval = [&](double mu, double& s, double& ds) {
    s = 0.0;
    ds = 0.0;
    for (Index j = 0; j < lam.size(); ++j) {
      const double q = 1.0 / (1.0 + mu * lam(j));
      const double t = lam(j) * dt(j) * dt(j) * q * q;
      s += t;
      ds -= 2.0 * lam(j) * t * q;
    }
  };

  double lo = 0.0;
  double hi = dt.norm() / (e.radius() * std::sqrt(lam.minCoeff()));
  double mu = 0.0;
  for (int it = 0; it < 200; ++it) {
    double s = 0.0;
    double ds = 0.0;
    eval(mu, s, ds);
    const double phi = s - eta2;
    if (std::abs(phi) <= tol * eta2) break;
    if (phi > 0.0) {
      lo = mu;
    } else {
      hi = mu;
    }
    const double root_s = std::sqrt(s);
    const double psi = 1.0 / e.radius() - 1.0 / root_s;
    const double dpsi = 0.5 * ds / (s * root_s);
    double next = mu - psi / dpsi;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - mu) <= 1e-17 * std::max(1.0, mu)) {
      mu = next;
      break;
    }
    mu = next;
  }

  Vector scaled(lam.size());
  for (Index j = 0; j < lam.size(); ++j) scaled(j) = dt(j) / (1.0 + mu * lam(j));
  return e.center() + e.eigenvectors() * scaled;
}

Point project_diagonal(const DiagonalSubspace& d, const Point& z) {
  require_dim(d.dim(), z, "project_diagonal");
  const Index n = d.block_dim();
  Vector mean = Vector::Zero(n);
  for (Index i = 0; i < d.copies(); ++i) mean += z.segment(i * n, n);
  mean /= static_cast<double>(d.copies());
  return mean.replicate(d.copies(), 1);
}

Point project(const ConvexBody& body, const Point& x, double tol) {
  struct Projector {
    const Point& x;
    double tol;
    Point operator()(const Halfspace& h) const {
      if (h.dim() == x.size() && h.residual(x) <= kMembershipTol) return x;
      return project_halfspace(h, x);
    }
    Point operator()(const Polyhedron& p) const { return project_polyhedron(p, x, tol); }
    Point operator()(const Ellipsoid& e) const { return project_ellipsoid(e, x, tol); }
    Point operator()(const Ball& b) const {
      if (b.dim() == x.size() && b.residual(x) <= kMembershipTol) return x;
      return project_ball(b, x);
    }
    Point operator()(const ProductBody& p) const {
      require_dim(p.dim(), x, "project(product)");
      Point out(x.size());
      for (std::size_t i = 0; i < p.blocks().size(); ++i) {
        const Index off = p.offsets()[i];
        const Index len = p.blocks()[i].dim();
        out.segment(off, len) = project(p.blocks()[i], x.segment(off, len), tol);
      }
      return out;
    }
    Point operator()(const DiagonalSubspace& d) const { return project_diagonal(d, x); }
  };
  if (!x.allFinite()) throw InputError("project: point has non-finite entries");
  return std::visit(Projector{x, tol}, body.variant());
}

bool contains(const ConvexBody& body, const Point& x) {
  struct Member {
    const Point& x;
    bool operator()(const Halfspace& h) const { return h.residual(x) <= kMembershipTol; }
    bool operator()(const Polyhedron& p) const { return p.residual(x) <= kMembershipTol; }
    bool operator()(const Ellipsoid& e) const { return e.residual(x) <= kMembershipTol; }
    bool operator()(const Ball& b) const { return b.residual(x) <= kMembershipTol; }
    bool operator()(const ProductBody& p) const {
      for (std::size_t i = 0; i < p.blocks().size(); ++i) {
        if (!contains(p.blocks()[i], x.segment(p.offsets()[i], p.blocks()[i].dim()))) return false;
      }
      return true;
    }
    bool operator()(const DiagonalSubspace& d) const {
      return (x - project_diagonal(d, x)).norm() <= kMembershipTol;
    }
  };
  if (x.size() != body.dim()) throw InputError("contains: dimension mismatch");
  return std::visit(Member{x}, body.variant());
}

double distance(const ConvexBody& body, const Point& x, double tol) {
  return (x - project(body, x, tol)).norm();
}

double violation_delta(std::span<const ConvexBody> bodies, const Point& x, double tol) {
  if (bodies.empty()) throw InputError("violation_delta: empty body list");
  double worst = 0.0;
  for (const auto& b : bodies) worst = std::max(worst, distance(b, x, tol));
  return worst;
}

SublevelStep approx_project_sublevel(const ConvexBody& body, const Point& x, bool measure_epsilon) {
  if (x.size() != body.dim()) throw InputError("approx_project_sublevel: dimension mismatch");
  double g = 0.0;
  Vector grad;
  if (const auto* h = body.get_if<Halfspace>()) {
    g = h->residual(x);
    grad = h->normal();
  } else if (const auto* p = body.get_if<Polyhedron>()) {
    const Vector r = p->rows() * x - p->rhs();
    Index j = 0;
    g = r.maxCoeff(&j);
    grad = p->rows().row(j).transpose();
  } else if (const auto* e = body.get_if<Ellipsoid>()) {
    const Vector d = x - e->center();
    const Vector qd = e->shape() * d;
    g = d.dot(qd) - e->radius() * e->radius();
    grad = 2.0 * qd;
  } else if (const auto* b = body.get_if<Ball>()) {
    const Vector d = x - b->center();
    g = d.squaredNorm() - b->radius() * b->radius();
    grad = 2.0 * d;
  } else {
    throw InputError("approx_project_sublevel: no sublevel residual for " +
                     std::string(body.kind_name()));
  }

  SublevelStep step;
  if (g <= kMembershipTol) {
    step.point = x;
    step.pass = true;
    if (measure_epsilon) step.measured_epsilon = 0.0;
    return step;
  }
  const double gn2 = grad.squaredNorm();
  if (!(gn2 > 0.0)) throw SolverError("approx_project_sublevel: degenerate subgradient at infeasible point");
  step.point = x - (g / gn2) * grad;
  const Vector normal = x - step.point;
  step.cut = Halfspace(normal, normal.dot(step.point));
  if (measure_epsilon) {
    const double dx = distance(body, x);
    step.measured_epsilon = dx > 0.0 ? distance(body, step.point) / dx : 0.0;
  }
  return step;
}

}  // namespace halpern
