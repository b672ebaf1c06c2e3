#include "lpsdg/fem_spaces.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>

namespace lpsdg {

namespace {

// 1D Lagrange basis on `nodes`: value and derivative of function i at x.
void line_lagrange(const std::vector<double>& nodes, double x, Eigen::VectorXd& value,
                   Eigen::VectorXd& deriv) {
  const std::size_t n = nodes.size();
  value.resize(static_cast<Eigen::Index>(n));
  deriv.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    double denom = 1.0;
    double prod = 1.0;
    double dsum = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
      if (m == i) {
        continue;
      }
      denom *= nodes[i] - nodes[m];
      // derivative of the product by the product rule
      dsum = dsum * (x - nodes[m]) + prod;
      prod *= x - nodes[m];
    }
    value[static_cast<Eigen::Index>(i)] = prod / denom;
    deriv[static_cast<Eigen::Index>(i)] = dsum / denom;
  }
}

double ipow(double x, int e) {
  double out = 1.0;
  for (int i = 0; i < e; ++i) {
    out *= x;
  }
  return out;
}

}  // namespace

ReferenceElement::ReferenceElement(ElementFamily family, int r) : family_(family), r_(r) {
  const int min_order = family == ElementFamily::Qr ? 1 : 2;
  if (r < min_order || r > kMaxSpatialOrder) {
    throw std::invalid_argument("reference_element: unsupported order r = " + std::to_string(r));
  }
  switch (family) {
    case ElementFamily::Qr:
    case ElementFamily::QrBubble: {
      for (int i = 0; i <= r; ++i) {
        line_nodes_.push_back(-1.0 + 2.0 * i / r);
      }
      for (int j = 0; j <= r; ++j) {
        for (int i = 0; i <= r; ++i) {
          nodes_.emplace_back(line_nodes_[i], line_nodes_[j]);
        }
      }
      local_dim_ = nodes_.size() + (family == ElementFamily::QrBubble ? 2 : 0);
      break;
    }
    case ElementFamily::PrDisc: {
      for (int deg = 0; deg <= r - 1; ++deg) {
        for (int b = 0; b <= deg; ++b) {
          monomials_.emplace_back(deg - b, b);
        }
      }
      local_dim_ = monomials_.size();
      break;
    }
  }
}

ShapeValues ReferenceElement::evaluate(const Point2& xhat) const {
  ShapeValues out;
  const auto dim = static_cast<Eigen::Index>(local_dim_);
  out.values.resize(dim);
  out.gradients.resize(dim, 2);
  const double x = xhat.x();
  const double y = xhat.y();

  if (family_ == ElementFamily::PrDisc) {
    for (Eigen::Index m = 0; m < dim; ++m) {
      const auto [a, b] = monomials_[static_cast<std::size_t>(m)];
      out.values[m] = ipow(x, a) * ipow(y, b);
      out.gradients(m, 0) = a == 0 ? 0.0 : a * ipow(x, a - 1) * ipow(y, b);
      out.gradients(m, 1) = b == 0 ? 0.0 : b * ipow(x, a) * ipow(y, b - 1);
    }
    return out;
  }

  Eigen::VectorXd lx, dlx, ly, dly;
  line_lagrange(line_nodes_, x, lx, dlx);
  line_lagrange(line_nodes_, y, ly, dly);
  const Eigen::Index side = r_ + 1;
  for (Eigen::Index j = 0; j < side; ++j) {
    for (Eigen::Index i = 0; i < side; ++i) {
      const Eigen::Index a = j * side + i;
      out.values[a] = lx[i] * ly[j];
      out.gradients(a, 0) = dlx[i] * ly[j];
      out.gradients(a, 1) = lx[i] * dly[j];
    }
  }
  if (family_ == ElementFamily::QrBubble) {
    const Eigen::Index a = side * side;
    const double bx = 1.0 - x * x;
    const double by = 1.0 - y * y;
    const int e = r_ - 1;
    out.values[a] = bx * by * ipow(x, e);
    out.gradients(a, 0) = by * (-2.0 * x * ipow(x, e) + bx * e * ipow(x, e - 1));
    out.gradients(a, 1) = bx * (-2.0 * y) * ipow(x, e);
    out.values[a + 1] = bx * by * ipow(y, e);
    out.gradients(a + 1, 0) = by * (-2.0 * x) * ipow(y, e);
    out.gradients(a + 1, 1) = bx * (-2.0 * y * ipow(y, e) + by * e * ipow(y, e - 1));
  }
  return out;
}

ReferenceElement reference_element(ElementFamily family, int r) {
  return ReferenceElement(family, r);
}

QuadratureRule2D spatial_quadrature(int r) { return tensor_gauss(r + 2); }

ElementTable tabulate(const ReferenceElement& element, const QuadratureRule2D& rule) {
  const auto nq = static_cast<Eigen::Index>(rule.size());
  const auto nd = static_cast<Eigen::Index>(element.local_dim());
  ElementTable table;
  table.values.resize(nq, nd);
  table.dx.resize(nq, nd);
  table.dy.resize(nq, nd);
  for (Eigen::Index q = 0; q < nq; ++q) {
    const ShapeValues s = element.evaluate(rule.points[static_cast<std::size_t>(q)]);
    table.values.row(q) = s.values.transpose();
    table.dx.row(q) = s.gradients.col(0).transpose();
    table.dy.row(q) = s.gradients.col(1).transpose();
  }
  return table;
}

VelocitySpace::VelocitySpace(std::shared_ptr<const Mesh> mesh, int r, bool enriched)
    : mesh_(std::move(mesh)),
      element_(enriched ? ElementFamily::QrBubble : ElementFamily::Qr, r) {
  const std::size_t n = mesh_->cells_per_side();
  const auto ur = static_cast<std::size_t>(r);
  lattice_side_ = n * ur + 1;
  scalar_dim_ = lattice_nodes() + (enriched ? 2 * mesh_->num_cells() : 0);

  const std::size_t local = element_.local_dim();
  cell_dofs_.resize(mesh_->num_cells() * local);
  for (const Cell& cell : mesh_->cells()) {
    const std::size_t ci = cell.index % n;
    const std::size_t cj = cell.index / n;
    std::size_t* dofs = cell_dofs_.data() + cell.index * local;
    for (std::size_t j = 0; j <= ur; ++j) {
      for (std::size_t i = 0; i <= ur; ++i) {
        dofs[j * (ur + 1) + i] = (cj * ur + j) * lattice_side_ + (ci * ur + i);
      }
    }
    if (enriched) {
      dofs[(ur + 1) * (ur + 1)] = lattice_nodes() + 2 * cell.index;
      dofs[(ur + 1) * (ur + 1) + 1] = lattice_nodes() + 2 * cell.index + 1;
    }
  }

  for (std::size_t J = 0; J < lattice_side_; ++J) {
    for (std::size_t I = 0; I < lattice_side_; ++I) {
      if (I == 0 || J == 0 || I + 1 == lattice_side_ || J + 1 == lattice_side_) {
        boundary_.push_back(J * lattice_side_ + I);
      }
    }
  }
}

Point2 VelocitySpace::node_point(std::size_t scalar) const {
  const std::size_t I = scalar % lattice_side_;
  const std::size_t J = scalar / lattice_side_;
  const auto last = static_cast<double>(lattice_side_ - 1);
  return {static_cast<double>(I) / last, static_cast<double>(J) / last};
}

PressureSpace::PressureSpace(std::shared_ptr<const Mesh> mesh, int r)
    : mesh_(std::move(mesh)), element_(ElementFamily::PrDisc, r) {}

DiscreteSpaces build_spaces(std::shared_ptr<const Mesh> mesh, int r, bool enriched) {
  if (r < 2) {
    throw std::invalid_argument("build_spaces: r must be >= 2");
  }
  return DiscreteSpaces{mesh, VelocitySpace(mesh, r, enriched), PressureSpace(mesh, r)};
}

std::vector<std::pair<std::size_t, double>> dirichlet_values(const VelocitySpace& space,
                                                             const VectorField& g, double t) {
  std::vector<std::pair<std::size_t, double>> out;
  out.reserve(2 * space.boundary_dofs().size());
  for (const std::size_t s : space.boundary_dofs()) {
    const Vec2 value = g(t, space.node_point(s));
    out.emplace_back(VelocitySpace::vector_dof(s, 0), value.x());
    out.emplace_back(VelocitySpace::vector_dof(s, 1), value.y());
  }
  return out;
}

Eigen::VectorXd interpolate(const VelocitySpace& space,
                            const std::function<Vec2(const Point2&)>& field) {
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.dim()));
  for (std::size_t s = 0; s < space.lattice_nodes(); ++s) {
    const Vec2 v = field(space.node_point(s));
    coeffs[static_cast<Eigen::Index>(2 * s)] = v.x();
    coeffs[static_cast<Eigen::Index>(2 * s + 1)] = v.y();
  }
  if (!space.enriched()) {
    return coeffs;
  }

  const Mesh& mesh = space.mesh();
  const QuadratureRule2D rule = spatial_quadrature(space.order());
  const ElementTable table = tabulate(space.element(), rule);
  const auto nodal = static_cast<Eigen::Index>(space.element().nodal_dim());
  const auto nq = static_cast<Eigen::Index>(rule.size());

  // The 2x2 bubble Gram matrix is the same on every (congruent) cell.
  const Eigen::MatrixXd bubbles = table.values.rightCols(2);
  Eigen::VectorXd w(nq);
  for (Eigen::Index q = 0; q < nq; ++q) {
    w[q] = rule.weights[static_cast<std::size_t>(q)];
  }
  const Eigen::Matrix2d gram = bubbles.transpose() * w.asDiagonal() * bubbles;
  const Eigen::LLT<Eigen::Matrix2d> llt(gram);

  for (const Cell& cell : mesh.cells()) {
    const auto dofs = space.cell_dofs(cell.index);
    Eigen::MatrixX2d residual(nq, 2);
    for (Eigen::Index q = 0; q < nq; ++q) {
      const Point2 x = mesh.reference_map(cell, rule.points[static_cast<std::size_t>(q)]).x;
      const Vec2 exact = field(x);
      Vec2 interp = Vec2::Zero();
      for (Eigen::Index a = 0; a < nodal; ++a) {
        const std::size_t s = dofs[static_cast<std::size_t>(a)];
        interp.x() += table.values(q, a) * coeffs[static_cast<Eigen::Index>(2 * s)];
        interp.y() += table.values(q, a) * coeffs[static_cast<Eigen::Index>(2 * s + 1)];
      }
      residual.row(q) = (exact - interp).transpose();
    }
    const Eigen::Matrix2d fit = llt.solve(bubbles.transpose() * w.asDiagonal() * residual);
    for (int b = 0; b < 2; ++b) {
      const std::size_t s = dofs[static_cast<std::size_t>(nodal + b)];
      coeffs[static_cast<Eigen::Index>(2 * s)] = fit(b, 0);
      coeffs[static_cast<Eigen::Index>(2 * s + 1)] = fit(b, 1);
    }
  }
  return coeffs;
}

Eigen::VectorXd project_pressure(const PressureSpace& space,
                                 const std::function<double(const Point2&)>& field) {
  const Mesh& mesh = space.mesh();
  const QuadratureRule2D rule = spatial_quadrature(space.element().order());
  const ElementTable table = tabulate(space.element(), rule);
  const auto nq = static_cast<Eigen::Index>(rule.size());
  Eigen::VectorXd w(nq);
  for (Eigen::Index q = 0; q < nq; ++q) {
    w[q] = rule.weights[static_cast<std::size_t>(q)];
  }
  const Eigen::MatrixXd gram = table.values.transpose() * w.asDiagonal() * table.values;
  const Eigen::LLT<Eigen::MatrixXd> llt(gram);

  Eigen::VectorXd coeffs(static_cast<Eigen::Index>(space.dim()));
  const auto nd = static_cast<Eigen::Index>(space.element().local_dim());
  for (const Cell& cell : mesh.cells()) {
    Eigen::VectorXd values(nq);
    for (Eigen::Index q = 0; q < nq; ++q) {
      values[q] = field(mesh.reference_map(cell, rule.points[static_cast<std::size_t>(q)]).x);
    }
    coeffs.segment(static_cast<Eigen::Index>(space.cell_offset(cell.index)), nd) =
        llt.solve(table.values.transpose() * w.asDiagonal() * values);
  }
  return coeffs;
}

}  // namespace lpsdg
