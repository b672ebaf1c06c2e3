#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "lpsdg/fem_spaces.hpp"
#include "lpsdg/linear_solver.hpp"
#include "lpsdg/mesh.hpp"
#include "lpsdg/quadrature.hpp"

namespace lpsdg {

/// Local L2 projection pi_K onto D(K) = P_{r-1}(K) and the fluctuation
/// operator kappa_K = id - pi_K, both acting on values sampled at the points
/// of a fixed quadrature rule on K.
///
/// Also holds the gradient moments of the velocity shape functions, from
/// which the cell stabilization matrix is formed. On the uniform mesh every
/// cell is congruent, so one projector serves the whole mesh.
class LocalProjector {
 public:
  /// Throws std::invalid_argument if `rule` is not exact for degree 2(r-1).
  LocalProjector(const Mesh& mesh, const Cell& cell, const ReferenceElement& velocity_element,
                 const QuadratureRule2D& rule);

  std::size_t projection_dim() const { return static_cast<std::size_t>(gram_.rows()); }
  std::size_t num_points() const { return static_cast<std::size_t>(weights_.size()); }

  /// Coefficients of pi_K f in the monomial basis of D(K).
  Eigen::VectorXd project(const Eigen::VectorXd& point_values) const;
  /// Values of pi_K f at the quadrature points.
  Eigen::VectorXd projection_values(const Eigen::VectorXd& point_values) const;
  /// Values of kappa_K f at the quadrature points.
  Eigen::VectorXd fluctuation(const Eigen::VectorXd& point_values) const;
  /// ||kappa_K f||^2_K.
  double fluctuation_norm_squared(const Eigen::VectorXd& point_values) const;

  /// sum_d (kappa_K d_d phi_a, kappa_K d_d phi_b)_K over the scalar velocity
  /// shape functions; symmetric positive semidefinite.
  const Eigen::MatrixXd& unit_stabilization() const { return unit_stabilization_; }

  const Eigen::MatrixXd& gram() const { return gram_; }
  /// Physical quadrature weights (reference weight times |det J|).
  const Eigen::VectorXd& weights() const { return weights_; }

 private:
  Eigen::VectorXd weights_;
  Eigen::MatrixXd basis_;  // num_points x projection_dim
  Eigen::MatrixXd gram_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::MatrixXd unit_stabilization_;
};

LocalProjector local_projector(const Mesh& mesh, const Cell& cell,
                               const ReferenceElement& velocity_element,
                               const QuadratureRule2D& rule);

/// Stabilization weight mu_K, constant over the mesh. Throws for mu < 0.
struct StabParams {
  explicit StabParams(double mu);
  double mu;
};

/// S with v^T S w = sum_K mu (kappa_K grad v_h, kappa_K grad w_h)_K over the
/// full vector velocity space (interleaved components).
SparseMatrix assemble_Sh(const VelocitySpace& space, const LocalProjector& projector,
                         const StabParams& params);

/// Assembles the same scalar cell matrix on every cell, component by component.
SparseMatrix assemble_componentwise(const VelocitySpace& space, const Eigen::MatrixXd& local);

}  // namespace lpsdg
