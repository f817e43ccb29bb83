#pragma once

#include "halpern/instance.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace halpern {

/// m ellipsoids in R^n whose intersection contains the ball of radius theta
/// about the origin.  Centers and A_i entries are uniform in [-1, 1], lambda_i
/// uniform in (0.1, 1.1), Q_i = A_i A_i^T + lambda_i I and
/// eta_i = (theta + |y_i|) sqrt(|Q_i|_2).  The anchor is t v for a uniform
/// direction v in [-1, 1]^n, with t beyond every ellipsoid exit point along v.
Instance gen_ellipsoid_instance(Index m, Index n, double theta, std::uint64_t seed);

/// m polyhedra {x : A x <= A x* + alpha xi_i} sharing one uniform k x n
/// matrix A; x* uniform in [-1, 1]^n, xi_i uniform in [0, 1]^k.  The anchor
/// is drawn uniform in [-2, 2]^n until it violates the intersection.
Instance gen_polyhedron_instance(Index m, Index n, Index k, double alpha, std::uint64_t seed);

/// Feasible point known by construction: origin (ellipsoid), x* (polyhedron).
/// Throws InputError when the instance carries none.
Point construction_witness(const Instance& instance);

struct ReferenceReport {
  Point point;           // the Dykstra answer
  Point second_route;    // the interior-point answer
  double certified_tol = 0.0;
  double disagreement = 0.0;
  long dykstra_cycles = 0;
  int interior_point_iterations = 0;
};

struct ReferenceOptions {
  long max_dykstra_cycles = 5'000'000;
  double wall_limit = 300.0;
};

/// Best approximation of `anchor` in the intersection, computed by Dykstra
/// (to delta <= tol/10 and movement <= tol/10) and independently by a
/// primal-dual interior-point method.  Disagreement above tol raises
/// OracleError.
ReferenceReport reference_projection(const Instance& instance, const Point& anchor, double tol,
                                     const ReferenceOptions& opt = {});
ReferenceReport reference_projection(const Instance& instance, double tol,
                                     const ReferenceOptions& opt = {});

/// Computes the reference and stores it in instance.reference.
void attach_reference(Instance& instance, double tol, const ReferenceOptions& opt = {});

/// Normal-cone test at s for linear constraints (halfspaces and polyhedron
/// rows): x0 - s must be a nonnegative combination of the normals of the
/// constraints with slack <= active_tol.  Returns the relative residual
/// |x0 - s - sum mu_j a_j| / max(1, |x0 - s|) of the best such combination.
double kkt_normal_cone_residual(const Instance& instance, const Point& s, double active_tol = 1e-7);

// JSON persistence (schema version 1).
std::string instance_to_json(const Instance& instance);
Instance instance_from_json(const std::string& text);
void save_instance(const Instance& instance, const std::filesystem::path& path);
Instance load_instance(const std::filesystem::path& path);

}  // namespace halpern
