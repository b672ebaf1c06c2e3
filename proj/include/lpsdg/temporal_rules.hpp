#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace lpsdg {

/// Right-sided Gauss-Radau rule with k+1 points on [-1, 1]; the last point is 1.
/// Exact for polynomials of degree <= 2k.
struct RadauRule {
  int k = 0;
  std::vector<double> points;
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
};

/// Supported range 0 <= k <= 5; throws std::invalid_argument otherwise.
RadauRule gauss_radau(int k);

inline constexpr int kMaxTemporalDegree = 5;

/// Lagrange basis on arbitrary distinct nodes, evaluated in barycentric form.
class LagrangeBasis1D {
 public:
  explicit LagrangeBasis1D(std::vector<double> nodes);

  std::size_t size() const { return nodes_.size(); }
  std::span<const double> nodes() const { return nodes_; }

  /// Values of every basis function at t.
  Eigen::VectorXd values(double t) const;

  /// D(i, j) = phi_j'(t_i), derivatives at the nodes themselves.
  Eigen::MatrixXd differentiation_matrix() const;

 private:
  std::vector<double> nodes_;
  std::vector<double> bary_;
};

/// Stage coupling of the dG(k) slab system:
///   sum_j alpha(i,j) (U^j, v) + tau/2 [...] = beta(i) (U^0, v) + ...
struct SlabCoefficients {
  Eigen::MatrixXd alpha;
  Eigen::VectorXd beta;
};

SlabCoefficients slab_coefficients(const RadauRule& rule);

/// A reference rule mapped affinely onto (t_prev, t_prev + tau].
struct SlabQuadrature {
  std::vector<double> points;
  std::vector<double> weights;
};

/// Throws std::invalid_argument for tau <= 0.
SlabQuadrature map_to_slab(const RadauRule& rule, double t_prev, double tau);

/// 0 = t_0 < t_1 < ... < t_N = T.
class TimePartition {
 public:
  /// Validates strictly increasing nodes starting at 0.
  explicit TimePartition(std::vector<double> nodes);
  static TimePartition uniform(double final_time, std::size_t num_slabs);

  std::size_t num_slabs() const { return nodes_.size() - 1; }
  std::span<const double> nodes() const { return nodes_; }
  /// Slab n in 1..N covers (t_{n-1}, t_n].
  double start(std::size_t n) const { return nodes_[n - 1]; }
  double end(std::size_t n) const { return nodes_[n]; }
  double tau(std::size_t n) const { return nodes_[n] - nodes_[n - 1]; }
  double max_tau() const;
  double min_tau() const;
  double final_time() const { return nodes_.back(); }

 private:
  std::vector<double> nodes_;
};

}  // namespace lpsdg
