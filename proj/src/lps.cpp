#include "lpsdg/lps.hpp"

#include <stdexcept>
#include <vector>

namespace lpsdg {

LocalProjector::LocalProjector(const Mesh& mesh, const Cell& cell,
                               const ReferenceElement& velocity_element,
                               const QuadratureRule2D& rule) {
  const int r = velocity_element.order();
  // A tensor Gauss rule with n points per direction is exact to degree 2n-1.
  std::size_t per_direction = 0;
  while (per_direction * per_direction < rule.size()) {
    ++per_direction;
  }
  if (per_direction * per_direction != rule.size() ||
      2 * static_cast<int>(per_direction) - 1 < 2 * (r - 1)) {
    throw std::invalid_argument("local_projector: quadrature not exact for degree 2(r-1)");
  }

  const ReferenceElement projection_element(ElementFamily::PrDisc, r);
  const double det = mesh.reference_map(cell, Point2::Zero()).jacobian_det;
  const double inv_scale = 1.0 / mesh.jacobian_scale();
  const auto nq = static_cast<Eigen::Index>(rule.size());

  weights_.resize(nq);
  for (Eigen::Index q = 0; q < nq; ++q) {
    weights_[q] = rule.weights[static_cast<std::size_t>(q)] * det;
  }
  basis_ = tabulate(projection_element, rule).values;
  gram_ = basis_.transpose() * weights_.asDiagonal() * basis_;
  llt_.compute(gram_);
  if (llt_.info() != Eigen::Success) {
    throw std::logic_error("local_projector: singular Gram matrix");
  }

  const ElementTable table = tabulate(velocity_element, rule);
  const auto nv = static_cast<Eigen::Index>(velocity_element.local_dim());
  unit_stabilization_ = Eigen::MatrixXd::Zero(nv, nv);
  for (const Eigen::MatrixXd* ref_derivative : {&table.dx, &table.dy}) {
    const Eigen::MatrixXd grad = inv_scale * (*ref_derivative);
    // (kappa f, kappa g) = (f, g) - (pi f, pi g)
    const Eigen::MatrixXd full = grad.transpose() * weights_.asDiagonal() * grad;
    const Eigen::MatrixXd moments = basis_.transpose() * weights_.asDiagonal() * grad;
    const Eigen::MatrixXd half = llt_.matrixL().solve(moments);
    unit_stabilization_ += full - half.transpose() * half;
  }
  const Eigen::MatrixXd sym = 0.5 * (unit_stabilization_ + unit_stabilization_.transpose());
  unit_stabilization_ = sym;
}

Eigen::VectorXd LocalProjector::project(const Eigen::VectorXd& point_values) const {
  return llt_.solve(basis_.transpose() * weights_.cwiseProduct(point_values));
}

Eigen::VectorXd LocalProjector::projection_values(const Eigen::VectorXd& point_values) const {
  return basis_ * project(point_values);
}

Eigen::VectorXd LocalProjector::fluctuation(const Eigen::VectorXd& point_values) const {
  return point_values - projection_values(point_values);
}

double LocalProjector::fluctuation_norm_squared(const Eigen::VectorXd& point_values) const {
  const Eigen::VectorXd k = fluctuation(point_values);
  return weights_.dot(k.cwiseProduct(k));
}

LocalProjector local_projector(const Mesh& mesh, const Cell& cell,
                               const ReferenceElement& velocity_element,
                               const QuadratureRule2D& rule) {
  return LocalProjector(mesh, cell, velocity_element, rule);
}

StabParams::StabParams(double mu_) : mu(mu_) {
  if (!(mu_ >= 0.0)) {
    throw std::invalid_argument("stabilization parameter mu must be non-negative");
  }
}

SparseMatrix assemble_componentwise(const VelocitySpace& space, const Eigen::MatrixXd& local) {
  const auto nv = static_cast<std::size_t>(local.rows());
  std::vector<Triplet> triplets;
  triplets.reserve(space.mesh().num_cells() * nv * nv * 2);
  for (std::size_t c = 0; c < space.mesh().num_cells(); ++c) {
    const auto dofs = space.cell_dofs(c);
    for (std::size_t a = 0; a < nv; ++a) {
      for (std::size_t b = 0; b < nv; ++b) {
        const double v = local(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        for (int comp = 0; comp < 2; ++comp) {
          triplets.emplace_back(static_cast<int>(VelocitySpace::vector_dof(dofs[a], comp)),
                                static_cast<int>(VelocitySpace::vector_dof(dofs[b], comp)), v);
        }
      }
    }
  }
  const auto n = static_cast<Eigen::Index>(space.dim());
  SparseMatrix m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

SparseMatrix assemble_Sh(const VelocitySpace& space, const LocalProjector& projector,
                         const StabParams& params) {
  return assemble_componentwise(space, params.mu * projector.unit_stabilization());
}

}  // namespace lpsdg
