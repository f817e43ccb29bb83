#include "halpern/interior_point.hpp"

#include "halpern/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace halpern {

namespace {

// Accepted residual inflation when the iteration stalls at rounding level.
constexpr double kStallFactor = 1e3;

// g(y) = a^T y - b  or  (y - c)^T Q (y - c) / r^2 - 1
struct Constraint {
  Vector a;  // linear normal (unit norm) or center
  double b = 0.0;
  Matrix Q;  // empty for linear; scaled by 1/r^2 otherwise
  Matrix R;  // Q = R^T R
  bool quadratic() const { return Q.size() > 0; }

  double value(const Point& y) const {
    if (!quadratic()) return a.dot(y) - b;
    const Vector d = y - a;
    return d.dot(Q * d) - 1.0;
  }
  Vector gradient(const Point& y) const {
    if (!quadratic()) return a;
    return 2.0 * (Q * (y - a));
  }
};

std::vector<Constraint> collect(std::span<const ConvexBody> bodies, Index n) {
  std::vector<Constraint> out;
  for (const auto& body : bodies) {
    if (body.dim() != n) throw InputError("interior_point_projection: dimension mismatch");
    if (const auto* h = body.get_if<Halfspace>()) {
      const double s = h->normal().norm();
      out.push_back({h->normal() / s, h->offset() / s, Matrix(), Matrix()});
    } else if (const auto* p = body.get_if<Polyhedron>()) {
      for (Index j = 0; j < p->row_count(); ++j) {
        const double s = p->rows().row(j).norm();
        out.push_back({p->rows().row(j).transpose() / s, p->rhs()(j) / s, Matrix(), Matrix()});
      }
    } else if (const auto* e = body.get_if<Ellipsoid>()) {
      const Matrix q = e->shape() / (e->radius() * e->radius());
      out.push_back({e->center(), 0.0, q, q.llt().matrixU()});
    } else if (const auto* ball = body.get_if<Ball>()) {
      if (!(ball->radius() > 0.0)) throw InputError("interior_point_projection: degenerate ball");
      const Matrix q = Matrix::Identity(n, n) / (ball->radius() * ball->radius());
      out.push_back({ball->center(), 0.0, q, Matrix::Identity(n, n) / ball->radius()});
    } else {
      throw InputError("interior_point_projection: unsupported body kind " + std::string(body.kind_name()));
    }
  }
  return out;
}

double max_step(const Vector& v, const Vector& dv, double fraction) {
  double step = 1.0;
  for (Index j = 0; j < v.size(); ++j) {
    if (dv(j) < 0.0) step = std::min(step, -fraction * v(j) / dv(j));
  }
  return step;
}

}  // namespace

InteriorPointResult interior_point_projection(std::span<const ConvexBody> bodies, const Point& x0,
                                              const InteriorPointOptions& opt) {
  const Index n = x0.size();
  const std::vector<Constraint> cons = collect(bodies, n);
  const Index q = static_cast<Index>(cons.size());
  if (q == 0) throw InputError("interior_point_projection: no constraints");

  InteriorPointResult out;
  Point y = x0;
  Vector g(q);
  Matrix J(q, n);
  auto evaluate = [&](const Point& at) {
    for (Index j = 0; j < q; ++j) {
      g(j) = cons[static_cast<std::size_t>(j)].value(at);
      J.row(j) = cons[static_cast<std::size_t>(j)].gradient(at).transpose();
    }
  };
  evaluate(y);
  Vector s = (-g).cwiseMax(1.0);
  Vector lam = Vector::Ones(q);
  const double scale = 1.0 + x0.norm();

  struct Snapshot {
    Point y;
    Vector lam;
    double rd = std::numeric_limits<double>::infinity(), rp = 0.0, mu = 0.0;
    int iteration = 0;
    double merit_scale = 1.0;
    double merit() const { return rd / merit_scale + rp; }
  };
  Snapshot best;
  best.merit_scale = scale;

  for (int it = 0; it < opt.max_iterations; ++it) {
    const Vector rd = (y - x0) + J.transpose() * lam;
    const Vector rp = g + s;
    const double mu = s.dot(lam) / static_cast<double>(q);
    out.iterations = it;
    out.dual_residual = rd.norm();
    out.primal_residual = rp.cwiseAbs().maxCoeff();
    out.complementarity = mu;
    if (out.dual_residual <= opt.tol * scale && out.primal_residual <= opt.tol &&
        mu <= 1e-2 * opt.tol) {
      out.converged = true;
      best = {y, lam, out.dual_residual, out.primal_residual, mu, it, scale};
      break;
    }
    // Once mu is negligible, rounding in nearly parallel rows sets a floor on
    // the dual residual; keep the best iterate and stop when it stalls.
    const double merit = out.dual_residual / scale + out.primal_residual;
    if (mu <= 1e-2 * opt.tol) {
      if (merit < best.merit()) {
        best = {y, lam, out.dual_residual, out.primal_residual, mu, it, scale};
      } else if (it - best.iteration >= 5) {
        break;
      }
    }

    // The Newton matrix I + sum 2 lam_j Q_j + J^T diag(lam/s) J is never
    // formed: near convergence lam/s spans ~30 decades, so the step is taken
    // as a least-squares problem over the stacked square-root factors.
    Index rows = n + q;
    for (const auto& c : cons) {
      if (c.quadratic()) rows += n;
    }
    Matrix K = Matrix::Zero(rows, n);
    K.topRows(n).setIdentity();
    Index r0 = n;
    for (Index j = 0; j < q; ++j) {
      const auto& c = cons[static_cast<std::size_t>(j)];
      if (!c.quadratic()) continue;
      K.middleRows(r0, n) = std::sqrt(2.0 * lam(j)) * c.R;
      r0 += n;
    }
    const Vector root_w = lam.cwiseQuotient(s).cwiseSqrt();
    K.bottomRows(q) = root_w.asDiagonal() * J;
    const Eigen::HouseholderQR<Matrix> qr(K);

    // Solve for a given complementarity target rc = lam .* s - sigma mu.
    auto direction = [&](const Vector& rc, Vector& dy, Vector& ds, Vector& dl) {
      // min |dy + rd|^2 + sum |R_j dy|^2 lam_j + |W^{1/2} J dy + W^{-1/2} v|^2
      const Vector v = (lam.cwiseProduct(rp) - rc).cwiseQuotient(s);
      Vector target = Vector::Zero(rows);
      target.head(n) = -rd;
      target.tail(q) = -v.cwiseQuotient(root_w);
      dy = qr.solve(target);
      if (!dy.allFinite()) throw SolverError("interior_point_projection: non-finite Newton step");
      ds = -rp - J * dy;
      dl = (-rc - lam.cwiseProduct(ds)).cwiseQuotient(s);
    };

    Vector dy, ds, dl;
    direction(lam.cwiseProduct(s), dy, ds, dl);
    const double ap = max_step(s, ds, 1.0);
    const double ad = max_step(lam, dl, 1.0);
    const double a_aff = std::min(ap, ad);
    const double mu_aff = (s + a_aff * ds).dot(lam + a_aff * dl) / static_cast<double>(q);
    // Keep centering while the residuals lag behind mu; pure Mehrotra steps
    // can pin a wrong slack at zero on parallel rows.
    const double lag = std::min(0.5, out.dual_residual / scale + out.primal_residual);
    const double sigma = std::max(std::pow(mu_aff / mu, 3), lag);

    const Vector rc = lam.cwiseProduct(s) + ds.cwiseProduct(dl) - Vector::Constant(q, sigma * mu);
    direction(rc, dy, ds, dl);
    double step = std::min(max_step(s, ds, 0.995), max_step(lam, dl, 0.995));

    // Quadratic constraints make the slack identity nonlinear; backtrack on
    // the merit |r| if the full step increases the residual badly.
    const double merit0 = rd.squaredNorm() + rp.squaredNorm();
    for (int bt = 0; bt < 30; ++bt) {
      const Point y1 = y + step * dy;
      const Vector s1 = s + step * ds;
      const Vector l1 = lam + step * dl;
      Vector g1(q);
      Matrix J1(q, n);
      for (Index j = 0; j < q; ++j) {
        g1(j) = cons[static_cast<std::size_t>(j)].value(y1);
        J1.row(j) = cons[static_cast<std::size_t>(j)].gradient(y1).transpose();
      }
      const double merit1 = ((y1 - x0) + J1.transpose() * l1).squaredNorm() + (g1 + s1).squaredNorm();
      if (merit1 <= std::max(merit0, 1e-30) * 4.0 || bt == 29) {
        y = y1;
        s = s1;
        lam = l1;
        g = g1;
        J = J1;
        break;
      }
      step *= 0.5;
    }
  }

  if (best.y.size() == 0) {
    out.point = y;
    out.multipliers = lam;
    return out;
  }
  out.point = best.y;
  out.multipliers = best.lam;
  out.dual_residual = best.rd;
  out.primal_residual = best.rp;
  out.complementarity = best.mu;
  out.converged = best.rd <= kStallFactor * opt.tol * scale && best.rp <= kStallFactor * opt.tol;
  return out;
}

}  // namespace halpern
