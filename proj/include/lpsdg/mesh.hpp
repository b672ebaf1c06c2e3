#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace lpsdg {

using Point2 = Eigen::Vector2d;

struct Cell {
  std::size_t index = 0;
  /// Counter-clockwise, starting at the lower-left vertex.
  std::array<std::size_t, 4> vertex_ids{};
};

/// Image of a reference point under the affine cell map together with the
/// (diagonal, constant) Jacobian of that map.
struct MappedPoint {
  Point2 x;
  double jacobian_scale = 0.0;  // J = jacobian_scale * I
  double jacobian_det = 0.0;
};

/// Uniform partition of the unit square into 4^level congruent squares.
///
/// Vertices and cells are numbered row-major (x fastest), so vertex (i, j)
/// has index j * (n + 1) + i and cell (i, j) has index j * n + i with
/// n = 2^level cells per side. The mesh is immutable after construction.
class Mesh {
 public:
  static Mesh uniform(int level);

  int level() const { return level_; }
  std::size_t cells_per_side() const { return n_; }
  double edge_length() const { return h_; }

  std::span<const Cell> cells() const { return cells_; }
  std::span<const Point2> vertices() const { return vertices_; }
  std::size_t num_cells() const { return cells_.size(); }

  Point2 lower_left(const Cell& cell) const { return vertices_[cell.vertex_ids[0]]; }
  Point2 center(const Cell& cell) const;

  /// Affine map from the reference cell (-1,1)^2 onto `cell`.
  MappedPoint reference_map(const Cell& cell, const Point2& xhat) const;

  /// Scale factor h/2 of the reference map; identical for every cell.
  double jacobian_scale() const { return 0.5 * h_; }
  double jacobian_det() const { return 0.25 * h_ * h_; }

 private:
  Mesh() = default;

  int level_ = 0;
  std::size_t n_ = 0;
  double h_ = 0.0;
  std::vector<Point2> vertices_;
  std::vector<Cell> cells_;
};

/// Throws std::invalid_argument for level < 1.
Mesh build_uniform_mesh(int level);

}  // namespace lpsdg
