#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lpsdg/assembly.hpp"
#include "lpsdg/fields.hpp"
#include "lpsdg/slab_solver.hpp"

namespace lpsdg {

/// Closed-form solution (u, p) of the Navier-Stokes equations on the unit
/// square together with the derivatives needed to build the forcing
///   f = u_t - nu lap u + (grad u) u + grad p.
struct ManufacturedCase {
  std::string name;
  double nu = 1.0;
  double final_time = 1.0;
  bool homogeneous = false;  // u = 0 on the boundary for all t

  VectorField velocity;
  TensorField gradient;
  VectorField time_derivative;
  VectorField laplacian;
  ScalarField pressure;
  VectorField pressure_gradient;

  Vec2 forcing(double t, const Point2& x) const;
  /// Forcing, boundary data and initial value for a solver run.
  ProblemData problem(double mu) const;
};

/// u = sin t (sin pi x sin pi y, cos pi x cos pi y), p = sin t (sin pi x + cos pi y - 2/pi).
ManufacturedCase case_space_dominant(double nu = 1e-6);
/// Stream function x^2(1-x)^2 y^2(1-y)^2 sin(10 pi t),
/// p = -(x^3 + y^3 - 0.5)(1.5 + 0.5 sin(10 pi t)).
ManufacturedCase case_time_dominant(double nu = 1e-6);
/// Velocity of case_time_dominant, p = -(x^3 + y^3 - 0.5)(1.5 + 0.5 t^{4/3}).
ManufacturedCase case_rough_pressure(double nu = 1e-6);
/// Steady u = (y, x), p = 0, reproduced exactly by every discrete space.
ManufacturedCase case_steady_check(double nu = 1e-6);

/// Looks up one of the cases above by name; throws std::invalid_argument.
ManufacturedCase make_case(const std::string& name, double nu);
std::vector<std::string> case_names();

/// Squared contributions of one slab. Q_n denotes the slab's Radau rule.
struct SlabErrors {
  double l2 = 0.0;          // Q_n[ |e|^2 ]
  double gradient = 0.0;    // Q_n[ nu |grad e|^2 ]
  double stabilization = 0.0;  // Q_n[ S_h(e, e) ]
  double jump = 0.0;        // |[e]_{n-1}|^2
  double pressure = 0.0;    // Q_n[ |p - p_h|^2 ], both shifted to zero mean
  double l2_gauss = 0.0;    // time integral of |e|^2 by a (k+3)-point Gauss rule
  double pressure_gauss = 0.0;
  double postprocessed = 0.0;  // same Gauss integral for the reconstruction
};

struct ErrorReport {
  std::vector<SlabErrors> slabs;
  double final_velocity = 0.0;  // |e(T^-)|

  /// Square roots of the slab sums.
  double l2l2_velocity() const;        // Gauss-in-time L2(L2)
  double l2l2_velocity_radau() const;  // Q_n-weighted L2(L2)
  double l2l2_pressure() const;        // Gauss-in-time, zero-mean
  double l2l2_pressure_radau() const;
  double jump() const;
  double gradient() const;
  double stabilization() const;
  std::optional<double> l2l2_postprocessed() const;
  /// (|e(T^-)|^2 + sum_n { |[e]_{n-1}|^2 + Q_n[nu |grad e|^2 + S_h(e,e)] + Q_n[|e|^2] })^{1/2}
  double snorm() const;

  bool has_postprocessed = false;
};

/// Errors of a computed trajectory against a manufactured solution. mu is
/// the stabilization constant used in S_h. Spatial integrals use the
/// discretization's quadrature rule.
ErrorReport compute_errors(const Discretization& disc, const TrajectoryRecord& trajectory,
                           const ManufacturedCase& mc, double mu,
                           const PostprocessedTrajectory* postprocessed = nullptr);

/// |u(t) - u_h|_{L2} for a single coefficient vector.
double velocity_l2_error(const Discretization& disc, const FieldCoefficients& uh,
                         const VectorField& u, double t);

/// Same, but with an independent tensor Gauss rule of `points` per direction.
double velocity_l2_error(const Discretization& disc, const FieldCoefficients& uh,
                         const VectorField& u, double t, int points);

/// Integral of p(t, .) over the unit square.
double pressure_mean(const ScalarField& p, double t, int points = 8);

struct EOCRow {
  double parameter = 0.0;
  double error = 0.0;
  std::optional<double> order;  // relative to the previous row; empty on row 0
};

struct EOCTable {
  std::vector<EOCRow> rows;
};

/// order_i = log(e_{i-1}/e_i) / log(param_{i-1}/param_i). Throws
/// std::invalid_argument for mismatched or too short lists, non-positive
/// or repeated parameters. Non-positive errors yield an empty order.
EOCTable eoc(std::span<const double> errors, std::span<const double> params);

}  // namespace lpsdg
