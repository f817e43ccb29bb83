#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace halpern {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Point = Eigen::VectorXd;

/// Absolute tolerance on a body's defining residual for membership.
inline constexpr double kMembershipTol = 1e-9;
/// Default accuracy of the iterative projectors (ellipsoid multiplier, polyhedral KKT).
inline constexpr double kProjectionTol = 1e-12;

/// {y : <a, y> <= b}
class Halfspace {
 public:
  Halfspace(Vector normal, double offset);

  const Vector& normal() const { return normal_; }
  double offset() const { return offset_; }
  Index dim() const { return normal_.size(); }
  double residual(const Point& x) const { return normal_.dot(x) - offset_; }

 private:
  Vector normal_;
  double offset_;
};

/// {y : A y <= b}
class Polyhedron {
 public:
  Polyhedron(Matrix rows, Vector rhs);

  const Matrix& rows() const { return rows_; }
  const Vector& rhs() const { return rhs_; }
  Index dim() const { return rows_.cols(); }
  Index row_count() const { return rows_.rows(); }
  /// max_j (<a_j, x> - b_j)
  double residual(const Point& x) const;

 private:
  Matrix rows_;
  Vector rhs_;
};

/// {y : (y - c)^T Q (y - c) <= eta^2} with Q symmetric positive definite.
/// The spectral decomposition of Q is computed once at construction.
class Ellipsoid {
 public:
  Ellipsoid(Vector center, Matrix shape, double radius);

  const Vector& center() const { return center_; }
  const Matrix& shape() const { return shape_; }
  double radius() const { return radius_; }
  const Vector& eigenvalues() const { return eigenvalues_; }
  const Matrix& eigenvectors() const { return eigenvectors_; }
  Index dim() const { return center_.size(); }
  double residual(const Point& x) const;

 private:
  Vector center_;
  Matrix shape_;
  double radius_;
  Vector eigenvalues_;
  Matrix eigenvectors_;
};

/// {y : ||y - c|| <= r}
class Ball {
 public:
  Ball(Vector center, double radius);

  const Vector& center() const { return center_; }
  double radius() const { return radius_; }
  Index dim() const { return center_.size(); }
  double residual(const Point& x) const { return (x - center_).squaredNorm() - radius_ * radius_; }

 private:
  Vector center_;
  double radius_;
};

class ConvexBody;

/// U_1 x ... x U_m acting blockwise on R^{n_1 + ... + n_m}.
class ProductBody {
 public:
  explicit ProductBody(std::vector<ConvexBody> blocks);

  const std::vector<ConvexBody>& blocks() const { return blocks_; }
  const std::vector<Index>& offsets() const { return offsets_; }
  Index dim() const { return dim_; }

 private:
  std::vector<ConvexBody> blocks_;
  std::vector<Index> offsets_;
  Index dim_ = 0;
};

/// {(u, ..., u) : u in R^n} inside R^{n * copies}.
class DiagonalSubspace {
 public:
  DiagonalSubspace(Index block_dim, Index copies);

  Index block_dim() const { return block_dim_; }
  Index copies() const { return copies_; }
  Index dim() const { return block_dim_ * copies_; }

 private:
  Index block_dim_;
  Index copies_;
};

/// A closed convex set with an exact projector.
class ConvexBody {
 public:
  using Variant = std::variant<Halfspace, Polyhedron, Ellipsoid, Ball, ProductBody, DiagonalSubspace>;

  ConvexBody(Halfspace h) : body_(std::move(h)) {}
  ConvexBody(Polyhedron p) : body_(std::move(p)) {}
  ConvexBody(Ellipsoid e) : body_(std::move(e)) {}
  ConvexBody(Ball b) : body_(std::move(b)) {}
  ConvexBody(ProductBody p) : body_(std::move(p)) {}
  ConvexBody(DiagonalSubspace d) : body_(std::move(d)) {}

  const Variant& variant() const { return body_; }
  Index dim() const;
  std::string_view kind_name() const;

  template <class T>
  const T* get_if() const {
    return std::get_if<T>(&body_);
  }

 private:
  Variant body_;
};

Point project_halfspace(const Halfspace& h, const Point& x);
Point project_ellipsoid(const Ellipsoid& e, const Point& x, double tol = kProjectionTol);
Point project_ball(const Ball& b, const Point& x);
Point project_polyhedron(const Polyhedron& p, const Point& x, double tol = kProjectionTol);
Point project_diagonal(const DiagonalSubspace& d, const Point& z);

/// Exact Euclidean projection onto any supported body.
Point project(const ConvexBody& body, const Point& x, double tol = kProjectionTol);

/// Residual-based membership with absolute tolerance kMembershipTol.
bool contains(const ConvexBody& body, const Point& x);

double distance(const ConvexBody& body, const Point& x, double tol = kProjectionTol);

/// max_i dist(x, U_i)
double violation_delta(std::span<const ConvexBody> bodies, const Point& x,
                       double tol = kProjectionTol);

/// Result of the linearized (subgradient) projection onto a sublevel set g <= 0.
struct SublevelStep {
  Point point;                    // p-hat; equals x when g(x) <= 0
  std::optional<Halfspace> cut;   // {y : <x - p, y - p> <= 0}; empty on pass
  bool pass = false;
  /// dist(p, body) / dist(x, body); only filled when requested.
  std::optional<double> measured_epsilon;
};

/// One linearized projection step x - g(x) / |grad g(x)|^2 * grad g(x).
/// Supported residuals: halfspace, polyhedron (max of rows), ellipsoid, ball.
SublevelStep approx_project_sublevel(const ConvexBody& body, const Point& x,
                                     bool measure_epsilon = false);

}  // namespace halpern
