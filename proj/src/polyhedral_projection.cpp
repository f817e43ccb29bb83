#include "halpern/polyhedral_projection.hpp"

#include "halpern/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace halpern {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

Vector solve_passive(const Matrix& E, const Vector& f, const std::vector<Index>& passive) {
  Matrix Ep(E.rows(), static_cast<Index>(passive.size()));
  for (std::size_t c = 0; c < passive.size(); ++c) Ep.col(static_cast<Index>(c)) = E.col(passive[c]);
  return Ep.colPivHouseholderQr().solve(f);
}

}  // namespace

NnlsResult nnls(const Matrix& E, const Vector& f, int max_iterations) {
  const Index k = E.cols();
  if (E.rows() != f.size()) throw InputError("nnls: size mismatch");
  if (max_iterations <= 0) max_iterations = static_cast<int>(std::max<Index>(100, 10 * k));

  Vector u = Vector::Zero(k);
  std::vector<char> in_passive(static_cast<std::size_t>(k), 0);
  std::vector<char> blocked(static_cast<std::size_t>(k), 0);
  const double enorm = E.norm();
  int iterations = 0;

  for (;;) {
    const Vector r = f - E * u;
    const Vector w = E.transpose() * r;
    const double wtol = 1e3 * kEps * enorm * (f.norm() + enorm * u.norm());

    Index t = -1;
    double best = wtol;
    for (Index j = 0; j < k; ++j) {
      if (in_passive[j] || blocked[j]) continue;
      if (w(j) > best) {
        best = w(j);
        t = j;
      }
    }
    if (t < 0) break;

    in_passive[t] = 1;
    bool first_pass = true;
    for (;;) {
      if (++iterations > max_iterations) {
        throw SolverError("nnls: iteration limit " + std::to_string(max_iterations) +
                          " exceeded (possible active-set cycling)");
      }
      std::vector<Index> passive;
      for (Index j = 0; j < k; ++j) {
        if (in_passive[j]) passive.push_back(j);
      }
      const Vector z = solve_passive(E, f, passive);

      if (first_pass) {
        // The entering column must receive a positive coefficient; if rounding
        // says otherwise, reject it until the iterate moves.
        const auto pos = std::find(passive.begin(), passive.end(), t) - passive.begin();
        if (!(z(pos) > 0.0)) {
          in_passive[t] = 0;
          blocked[t] = 1;
          break;
        }
        first_pass = false;
      }

      bool all_positive = true;
      for (std::size_t c = 0; c < passive.size(); ++c) {
        if (!(z(static_cast<Index>(c)) > 0.0)) {
          all_positive = false;
          break;
        }
      }
      if (all_positive) {
        u.setZero();
        for (std::size_t c = 0; c < passive.size(); ++c) u(passive[c]) = z(static_cast<Index>(c));
        std::fill(blocked.begin(), blocked.end(), 0);
        break;
      }

      double step = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < passive.size(); ++c) {
        const double zc = z(static_cast<Index>(c));
        if (zc <= 0.0) {
          const double uj = u(passive[c]);
          step = std::min(step, uj / (uj - zc));
        }
      }
      for (std::size_t c = 0; c < passive.size(); ++c) {
        const Index j = passive[c];
        u(j) += step * (z(static_cast<Index>(c)) - u(j));
        if (u(j) <= 10.0 * kEps * std::max(1.0, u.cwiseAbs().maxCoeff())) {
          u(j) = 0.0;
          in_passive[j] = 0;
        }
      }
      std::fill(blocked.begin(), blocked.end(), 0);
    }
  }

  NnlsResult out;
  out.residual_norm = (f - E * u).norm();
  out.solution = std::move(u);
  out.iterations = iterations;
  return out;
}

PolyhedralProjection project_onto_rows(const Matrix& A, const Vector& b, const Point& x, double tol) {
  const Index k = A.rows();
  const Index n = A.cols();
  if (b.size() != k || x.size() != n) throw InputError("project_onto_rows: dimension mismatch");
  if (k == 0) {
    PolyhedralProjection out;
    out.point = x;
    return out;
  }

  Vector row_norm(k);
  Matrix An(k, n);
  Vector bn(k);
  for (Index j = 0; j < k; ++j) {
    row_norm(j) = A.row(j).norm();
    if (!(row_norm(j) > 0.0)) throw InstanceError("project_onto_rows: zero row " + std::to_string(j));
    An.row(j) = A.row(j) / row_norm(j);
    bn(j) = b(j) / row_norm(j);
  }

  const Vector h = An * x - bn;
  PolyhedralProjection out;
  if (h.maxCoeff() <= 0.0) {
    out.point = x;
    out.multipliers = Vector::Zero(k);
    return out;
  }

  // Least-distance form: min |z| s.t. (-An) z >= h, with z = y - x.
  const double scale = h.cwiseAbs().maxCoeff();
  Matrix E(n + 1, k);
  E.topRows(n) = -An.transpose();
  E.row(n) = (h / scale).transpose();
  Vector f = Vector::Zero(n + 1);
  f(n) = 1.0;

  const NnlsResult sol = nnls(E, f);
  const Vector r = E * sol.solution - f;
  if (r.norm() <= 1e-12 || !(r(n) < 0.0)) {
    throw InstanceError("project_onto_rows: constraint system is infeasible");
  }

  const Vector z = (-scale / r(n)) * r.head(n);
  const Vector mu = (-scale / r(n)) * sol.solution;
  out.point = x + z;
  out.iterations = sol.iterations;
  out.multipliers = mu.cwiseQuotient(row_norm);

  const Vector slack = An * out.point - bn;
  out.feasibility = std::max(0.0, slack.maxCoeff());
  out.min_multiplier = mu.minCoeff();
  out.complementarity = mu.cwiseProduct(slack).cwiseAbs().maxCoeff();

  const double s = std::max(1.0, scale);
  const double ytol = tol * std::max(1.0, x.cwiseAbs().maxCoeff()) * s;
  if (out.feasibility > ytol || out.min_multiplier < -tol * s ||
      out.complementarity > tol * s * s * std::max(1.0, mu.cwiseAbs().maxCoeff())) {
    throw SolverError("project_onto_rows: KKT certificate failed (feasibility " +
                      std::to_string(out.feasibility) + ", min multiplier " +
                      std::to_string(out.min_multiplier) + ", complementarity " +
                      std::to_string(out.complementarity) + ")");
  }
  return out;
}

Point project_polyhedron(const Polyhedron& p, const Point& x, double tol) {
  if (x.size() != p.dim()) throw InputError("project_polyhedron: dimension mismatch");
  if (!(tol > 0.0)) throw InputError("project_polyhedron: tol must be positive");
  if (p.residual(x) <= kMembershipTol) return x;
  return project_onto_rows(p.rows(), p.rhs(), x, tol).point;
}

}  // namespace halpern
