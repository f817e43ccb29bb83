#include "halpern/circumcenter.hpp"

#include "halpern/errors.hpp"

#include <algorithm>

namespace halpern {

CircumcenterResult circumcenter(const std::vector<Point>& points) {
  if (points.empty()) throw InputError("circumcenter: need at least one point");
  const Index n = points.front().size();
  for (const auto& p : points) {
    if (p.size() != n) throw InputError("circumcenter: dimension mismatch");
  }

  const Point& p0 = points.front();
  const Index q = static_cast<Index>(points.size()) - 1;
  CircumcenterResult out;
  out.center = p0;
  if (q == 0) return out;

  // <d_i, c - p0> = |d_i|^2 / 2 with c - p0 restricted to span{d_i}.  The
  // minimum-norm solution of D^T v = b/2 lies in that span automatically and
  // equals D alpha for the min-norm alpha of the Gram system.
  Matrix Dt(q, n);
  Vector half_b(q);
  for (Index i = 0; i < q; ++i) {
    Dt.row(i) = (points[static_cast<std::size_t>(i + 1)] - p0).transpose();
    half_b(i) = 0.5 * Dt.row(i).squaredNorm();
  }

  Eigen::JacobiSVD<Matrix> svd(Dt, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  Vector v = Vector::Zero(n);
  int rank = 0;
  if (smax > 0.0) {
    const double cut = 1e-12 * smax;
    for (Index j = 0; j < sv.size(); ++j) {
      if (sv(j) > cut) {
        v += svd.matrixV().col(j) * (svd.matrixU().col(j).dot(half_b) / sv(j));
        ++rank;
      }
    }
  }

  out.center = p0 + v;
  out.rank = rank;
  out.degenerate = rank < q;
  out.radius = v.norm();
  double worst = 0.0;
  for (const auto& p : points) worst = std::max(worst, std::abs((out.center - p).norm() - out.radius));
  out.residual = worst;
  return out;
}

}  // namespace halpern
