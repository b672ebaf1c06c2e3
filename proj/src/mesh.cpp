#include "lpsdg/mesh.hpp"

#include <stdexcept>
#include <string>

namespace lpsdg {

Mesh Mesh::uniform(int level) {
  if (level < 1) {
    throw std::invalid_argument("mesh level must be >= 1, got " + std::to_string(level));
  }
  if (level > 12) {
    throw std::invalid_argument("mesh level " + std::to_string(level) + " is too large");
  }

  Mesh mesh;
  mesh.level_ = level;
  mesh.n_ = std::size_t{1} << level;
  mesh.h_ = 1.0 / static_cast<double>(mesh.n_);

  const std::size_t n = mesh.n_;
  mesh.vertices_.reserve((n + 1) * (n + 1));
  for (std::size_t j = 0; j <= n; ++j) {
    for (std::size_t i = 0; i <= n; ++i) {
      // Boundary coordinates come out as exactly 0 or 1.
      mesh.vertices_.emplace_back(static_cast<double>(i) / static_cast<double>(n),
                                  static_cast<double>(j) / static_cast<double>(n));
    }
  }

  mesh.cells_.reserve(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t ll = j * (n + 1) + i;
      Cell cell;
      cell.index = j * n + i;
      cell.vertex_ids = {ll, ll + 1, ll + n + 2, ll + n + 1};
      mesh.cells_.push_back(cell);
    }
  }
  return mesh;
}

Point2 Mesh::center(const Cell& cell) const {
  return lower_left(cell) + Point2(0.5 * h_, 0.5 * h_);
}

MappedPoint Mesh::reference_map(const Cell& cell, const Point2& xhat) const {
  MappedPoint mapped;
  mapped.jacobian_scale = jacobian_scale();
  mapped.jacobian_det = jacobian_det();
  mapped.x = center(cell) + mapped.jacobian_scale * xhat;
  return mapped;
}

Mesh build_uniform_mesh(int level) { return Mesh::uniform(level); }

}  // namespace lpsdg
