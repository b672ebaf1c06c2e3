#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "lpsdg/fields.hpp"
#include "lpsdg/mesh.hpp"
#include "lpsdg/quadrature.hpp"

namespace lpsdg {

enum class ElementFamily {
  Qr,        // continuous tensor-product Lagrange, degree r per direction
  QrBubble,  // Qr plus the two cell bubbles (1-x^2)(1-y^2) x_i^{r-1}
  PrDisc,    // discontinuous P_{r-1}, monomials in reference coordinates
};

struct ShapeValues {
  Eigen::VectorXd values;     // local_dim
  Eigen::MatrixX2d gradients;  // local_dim x 2, reference coordinates
};

/// Reference element on (-1,1)^2.
///
/// For the Q families the first (r+1)^2 functions are the nodal Lagrange
/// basis on the equispaced lattice (x index fastest); QrBubble appends the two
/// bubbles. PrDisc holds the monomials x^a y^b, a + b <= r - 1, ordered by
/// total degree.
class ReferenceElement {
 public:
  /// Throws std::invalid_argument for unsupported (family, r).
  ReferenceElement(ElementFamily family, int r);

  ElementFamily family() const { return family_; }
  int order() const { return r_; }
  std::size_t local_dim() const { return local_dim_; }
  /// Number of functions defined by point values at `nodes()`.
  std::size_t nodal_dim() const { return nodes_.size(); }
  std::span<const Point2> nodes() const { return nodes_; }

  ShapeValues evaluate(const Point2& xhat) const;

 private:
  ElementFamily family_;
  int r_;
  std::size_t local_dim_ = 0;
  std::vector<double> line_nodes_;
  std::vector<Point2> nodes_;
  std::vector<std::pair<int, int>> monomials_;
};

ReferenceElement reference_element(ElementFamily family, int r);

inline constexpr int kMaxSpatialOrder = 8;

/// Quadrature used for every spatial integral: r + 2 Gauss points per direction.
QuadratureRule2D spatial_quadrature(int r);

/// Shape functions tabulated at the points of a quadrature rule.
struct ElementTable {
  Eigen::MatrixXd values;  // num_points x local_dim
  Eigen::MatrixXd dx;      // reference derivatives
  Eigen::MatrixXd dy;
};

ElementTable tabulate(const ReferenceElement& element, const QuadratureRule2D& rule);

/// Continuous velocity space V_h = Y_h^2 with Y_h = Qr or QrBubble.
///
/// Scalar numbering: the (n r + 1)^2 lattice nodes row-major, followed by two
/// bubble dofs per cell. Vector dofs interleave the components of each scalar
/// dof: vector index = 2 * scalar + component.
class VelocitySpace {
 public:
  VelocitySpace(std::shared_ptr<const Mesh> mesh, int r, bool enriched);

  const Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
  const ReferenceElement& element() const { return element_; }
  int order() const { return element_.order(); }
  bool enriched() const { return element_.family() == ElementFamily::QrBubble; }

  std::size_t scalar_dim() const { return scalar_dim_; }
  std::size_t dim() const { return 2 * scalar_dim_; }
  std::size_t lattice_nodes() const { return lattice_side_ * lattice_side_; }

  /// Scalar global dof of each local shape function of `cell`.
  std::span<const std::size_t> cell_dofs(std::size_t cell) const {
    return {cell_dofs_.data() + cell * element_.local_dim(), element_.local_dim()};
  }
  static std::size_t vector_dof(std::size_t scalar, int component) {
    return 2 * scalar + static_cast<std::size_t>(component);
  }

  /// Position of a lattice dof; undefined for bubble dofs.
  Point2 node_point(std::size_t scalar) const;
  bool is_bubble(std::size_t scalar) const { return scalar >= lattice_nodes(); }

  /// Sorted scalar dofs whose node lies on the boundary of the unit square.
  std::span<const std::size_t> boundary_dofs() const { return boundary_; }

 private:
  std::shared_ptr<const Mesh> mesh_;
  ReferenceElement element_;
  std::size_t lattice_side_ = 0;
  std::size_t scalar_dim_ = 0;
  std::vector<std::size_t> cell_dofs_;
  std::vector<std::size_t> boundary_;
};

/// Discontinuous P_{r-1} pressure; cell c owns dofs [c * local_dim, (c+1) * local_dim).
class PressureSpace {
 public:
  PressureSpace(std::shared_ptr<const Mesh> mesh, int r);

  const Mesh& mesh() const { return *mesh_; }
  const ReferenceElement& element() const { return element_; }
  std::size_t dim() const { return mesh_->num_cells() * element_.local_dim(); }
  std::size_t cell_offset(std::size_t cell) const { return cell * element_.local_dim(); }

 private:
  std::shared_ptr<const Mesh> mesh_;
  ReferenceElement element_;
};

struct DiscreteSpaces {
  std::shared_ptr<const Mesh> mesh;
  VelocitySpace velocity;
  PressureSpace pressure;
};

/// Throws std::invalid_argument for r < 2.
DiscreteSpaces build_spaces(std::shared_ptr<const Mesh> mesh, int r, bool enriched);

/// (vector dof, value) pairs from nodal interpolation of g(t, .) at the boundary nodes.
std::vector<std::pair<std::size_t, double>> dirichlet_values(const VelocitySpace& space,
                                                             const VectorField& g, double t);

/// Nodal interpolant of `field`. Bubble coefficients (if any) are the
/// cellwise L2 best fit of the residual field - (nodal interpolant).
Eigen::VectorXd interpolate(const VelocitySpace& space,
                            const std::function<Vec2(const Point2&)>& field);

/// Cellwise L2 projection of a scalar field onto the pressure space.
Eigen::VectorXd project_pressure(const PressureSpace& space,
                                 const std::function<double(const Point2&)>& field);

}  // namespace lpsdg
