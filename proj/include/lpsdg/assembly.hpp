#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "lpsdg/fem_spaces.hpp"
#include "lpsdg/fields.hpp"
#include "lpsdg/linear_solver.hpp"
#include "lpsdg/lps.hpp"
#include "lpsdg/mesh.hpp"
#include "lpsdg/temporal_rules.hpp"

namespace lpsdg {

/// Flat coefficient vector over the global velocity or pressure dofs.
using FieldCoefficients = Eigen::VectorXd;

/// Velocity values and physical gradients of a discrete field at the
/// quadrature points of one cell.
struct CellFieldValues {
  Eigen::MatrixX2d values;  // num_points x 2
  Eigen::MatrixX2d dx;      // d/dx of both components
  Eigen::MatrixX2d dy;
};

/// Mesh, spaces, quadrature and the tabulated reference data shared by all
/// assembly routines. Immutable after construction.
class Discretization {
 public:
  Discretization(int level, int r, bool enriched, unsigned threads = 1);

  const Mesh& mesh() const { return *mesh_; }
  const VelocitySpace& velocity() const { return spaces_.velocity; }
  const PressureSpace& pressure() const { return spaces_.pressure; }
  int order() const { return spaces_.velocity.order(); }
  unsigned threads() const { return threads_; }

  const QuadratureRule2D& quadrature() const { return rule_; }
  const ElementTable& velocity_table() const { return velocity_table_; }
  const ElementTable& pressure_table() const { return pressure_table_; }
  const LocalProjector& projector() const { return *projector_; }

  /// Quadrature weights on a physical cell (identical for all cells).
  const Eigen::VectorXd& weights() const { return weights_; }
  /// Physical quadrature points of a cell.
  std::span<const Point2> points(std::size_t cell) const {
    return {points_.data() + cell * rule_.size(), rule_.size()};
  }
  /// Physical derivative tables d phi / dx, d phi / dy.
  const Eigen::MatrixXd& grad_x() const { return grad_x_; }
  const Eigen::MatrixXd& grad_y() const { return grad_y_; }

  /// Local coefficient block (local_dim x 2) of a velocity vector on a cell.
  Eigen::MatrixX2d gather(const FieldCoefficients& u, std::size_t cell) const;
  CellFieldValues evaluate_velocity(const FieldCoefficients& u, std::size_t cell) const;
  Eigen::VectorXd evaluate_pressure(const FieldCoefficients& p, std::size_t cell) const;

  /// Runs fn(cell) for every cell on the configured number of threads.
  void for_each_cell(const std::function<void(std::size_t)>& fn) const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  DiscreteSpaces spaces_;
  unsigned threads_;
  QuadratureRule2D rule_;
  ElementTable velocity_table_;
  ElementTable pressure_table_;
  Eigen::MatrixXd grad_x_;
  Eigen::MatrixXd grad_y_;
  Eigen::VectorXd weights_;
  std::vector<Point2> points_;
  std::unique_ptr<LocalProjector> projector_;
};

/// v^T M w = (v_h, w_h).
SparseMatrix assemble_mass(const Discretization& disc);

struct StokesBlocks {
  SparseMatrix viscous;     // v^T A w = nu (grad v_h, grad w_h)
  SparseMatrix divergence;  // (B v)_m = (psi_m, div v_h), pressure x velocity
};

StokesBlocks assemble_stokes(const Discretization& disc, double nu);

/// w^T N(u) v = n(u_h, v_h, w_h), the skew-symmetric convection form.
SparseMatrix assemble_convection(const Discretization& disc, const FieldCoefficients& u);

/// Components n(u_h, u_h, phi_a e_c) = N(u) u.
FieldCoefficients convection_residual(const Discretization& disc, const FieldCoefficients& u);

/// Derivative of u -> n(u_h, u_h, .): dN(u) delta = N(u) delta + N(delta) u.
SparseMatrix convection_jacobian(const Discretization& disc, const FieldCoefficients& u);

/// Component a: integral of f(t, .) . phi_a.
FieldCoefficients assemble_load(const Discretization& disc, const VectorField& f, double t);

/// g_m = (psi_m, 1): discrete pressure p has mean g^T p.
Eigen::VectorXd pressure_mean_weights(const Discretization& disc);

/// Unknown layout of the (k+1)-stage slab system. Stage i occupies one
/// block [velocity | pressure | gauge multiplier].
struct StageLayout {
  std::size_t stages = 0;
  std::size_t velocity = 0;
  std::size_t pressure = 0;

  std::size_t block() const { return velocity + pressure + 1; }
  std::size_t size() const { return stages * block(); }
  std::size_t velocity_offset(std::size_t i) const { return i * block(); }
  std::size_t pressure_offset(std::size_t i) const { return i * block() + velocity; }
  std::size_t gauge_index(std::size_t i) const { return i * block() + velocity + pressure; }
};

/// Residual and Jacobian of the slab equations
///
///   sum_j alpha_ij M U^j + tau/2 [(A + S) U^i - B^T P^i + N(U^i) U^i]
///       = beta_i M U^0 + tau/2 L(t_i)
///   B U^i + lambda_i g = 0,     g^T P^i = 0,
///
/// with the velocity rows of boundary dofs replaced by U^i_d = g_i,d. The
/// constant part of the Jacobian is assembled once per (tau, coefficients).
class StageSystem {
 public:
  StageSystem(const Discretization& disc, const SlabCoefficients& coeffs, double tau, double nu,
              const StabParams& stab);

  const StageLayout& layout() const { return layout_; }
  double tau() const { return tau_; }
  const SparseMatrix& mass() const { return mass_; }
  const SparseMatrix& viscous_plus_stabilization() const { return viscous_stab_; }
  const SparseMatrix& divergence() const { return divergence_; }
  const Eigen::VectorXd& mean_weights() const { return mean_weights_; }

  /// Constrained velocity dofs, in the order produced by dirichlet_values().
  std::span<const std::size_t> constrained_dofs() const { return constrained_; }

  /// Stores the prescribed boundary values of every stage. Each entry must
  /// list exactly the constrained dofs, e.g. the output of dirichlet_values().
  void apply_constraints(const std::vector<std::vector<std::pair<std::size_t, double>>>& bc);

  /// Overwrites the constrained entries of x with the stored boundary values.
  void impose_boundary_values(Eigen::VectorXd& x) const;

  /// `loads[i]` is the assembled load L(t_{n,i}) (unscaled).
  Eigen::VectorXd residual(const Eigen::VectorXd& x, const FieldCoefficients& u0,
                           std::span<const FieldCoefficients> loads) const;

  SparseMatrix jacobian(const Eigen::VectorXd& x) const;

  FieldCoefficients velocity(const Eigen::VectorXd& x, std::size_t stage) const;
  FieldCoefficients pressure(const Eigen::VectorXd& x, std::size_t stage) const;

 private:
  const Discretization& disc_;
  SlabCoefficients coeffs_;
  double tau_;
  StageLayout layout_;
  SparseMatrix mass_;
  SparseMatrix viscous_stab_;
  SparseMatrix divergence_;
  SparseMatrix constant_jacobian_;
  Eigen::VectorXd mean_weights_;
  std::vector<std::size_t> constrained_;
  std::vector<char> is_constrained_;
  std::vector<Eigen::VectorXd> bc_values_;
};

}  // namespace lpsdg
