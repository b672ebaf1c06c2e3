#include "lpsdg/temporal_rules.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "lpsdg/quadrature.hpp"

namespace lpsdg {

namespace {

// Monomial coefficients (ascending powers) of the Legendre polynomial P_n.
std::vector<double> legendre_coefficients(int n) {
  std::vector<double> prev{1.0};
  if (n == 0) {
    return prev;
  }
  std::vector<double> cur{0.0, 1.0};
  for (int m = 2; m <= n; ++m) {
    std::vector<double> next(m + 1, 0.0);
    for (std::size_t i = 0; i < cur.size(); ++i) {
      next[i + 1] += (2.0 * m - 1.0) / m * cur[i];
    }
    for (std::size_t i = 0; i < prev.size(); ++i) {
      next[i] -= (m - 1.0) / m * prev[i];
    }
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

// Roots of R(x) = P_k(x) - P_{k+1}(x) (which vanishes at x = 1), from the
// eigenvalues of its companion matrix, polished by Newton.
std::vector<double> radau_points(int k) {
  const int degree = k + 1;
  std::vector<double> coeff = legendre_coefficients(k + 1);
  const std::vector<double> lower = legendre_coefficients(k);
  for (double& c : coeff) {
    c = -c;
  }
  for (std::size_t i = 0; i < lower.size(); ++i) {
    coeff[i] += lower[i];
  }

  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(degree, degree);
  for (int i = 1; i < degree; ++i) {
    companion(i, i - 1) = 1.0;
  }
  for (int i = 0; i < degree; ++i) {
    companion(i, degree - 1) = -coeff[i] / coeff[degree];
  }
  const Eigen::EigenSolver<Eigen::MatrixXd> eig(companion, false);
  std::vector<double> roots(degree);
  for (int i = 0; i < degree; ++i) {
    roots[i] = eig.eigenvalues()[i].real();
  }
  std::sort(roots.begin(), roots.end());

  for (int i = 0; i < degree - 1; ++i) {
    double x = roots[i];
    for (int iter = 0; iter < 50; ++iter) {
      const auto pk = legendre(k, x);
      const auto pk1 = legendre(k + 1, x);
      const double dx = (pk.value - pk1.value) / (pk.derivative - pk1.derivative);
      x -= dx;
      if (std::abs(dx) < 1e-17) {
        break;
      }
    }
    roots[i] = x;
  }
  roots[degree - 1] = 1.0;
  return roots;
}

}  // namespace

RadauRule gauss_radau(int k) {
  if (k < 0 || k > kMaxTemporalDegree) {
    throw std::invalid_argument("gauss_radau: k must lie in [0, " +
                                std::to_string(kMaxTemporalDegree) + "], got " +
                                std::to_string(k));
  }
  RadauRule rule;
  rule.k = k;
  rule.points = radau_points(k);
  rule.weights.resize(rule.points.size());

  const double n = k + 1.0;
  for (std::size_t i = 0; i + 1 < rule.points.size(); ++i) {
    const double x = rule.points[i];
    const double pk = legendre(k, x).value;
    rule.weights[i] = (1.0 + x) / (n * n * pk * pk);
  }
  rule.weights.back() = 2.0 / (n * n);
  return rule;
}

LagrangeBasis1D::LagrangeBasis1D(std::vector<double> nodes) : nodes_(std::move(nodes)) {
  const std::size_t n = nodes_.size();
  if (n == 0) {
    throw std::invalid_argument("LagrangeBasis1D: no nodes");
  }
  bary_.assign(n, 1.0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t m = 0; m < n; ++m) {
      if (m != j) {
        const double diff = nodes_[j] - nodes_[m];
        if (diff == 0.0) {
          throw std::invalid_argument("LagrangeBasis1D: repeated node");
        }
        bary_[j] /= diff;
      }
    }
  }
}

Eigen::VectorXd LagrangeBasis1D::values(double t) const {
  const std::size_t n = nodes_.size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    if (t == nodes_[j]) {
      out[static_cast<Eigen::Index>(j)] = 1.0;
      return out;
    }
  }
  double denom = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double term = bary_[j] / (t - nodes_[j]);
    out[static_cast<Eigen::Index>(j)] = term;
    denom += term;
  }
  return out / denom;
}

Eigen::MatrixXd LagrangeBasis1D::differentiation_matrix() const {
  const auto n = static_cast<Eigen::Index>(nodes_.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double diag = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) {
        continue;
      }
      d(i, j) = (bary_[j] / bary_[i]) / (nodes_[i] - nodes_[j]);
      diag -= d(i, j);
    }
    d(i, i) = diag;
  }
  return d;
}

SlabCoefficients slab_coefficients(const RadauRule& rule) {
  const LagrangeBasis1D basis(rule.points);
  const Eigen::MatrixXd deriv = basis.differentiation_matrix();
  const Eigen::VectorXd at_left = basis.values(-1.0);
  const auto n = static_cast<Eigen::Index>(rule.size());

  SlabCoefficients c;
  c.beta.resize(n);
  c.alpha.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    c.beta[i] = at_left[i] / rule.weights[static_cast<std::size_t>(i)];
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      c.alpha(i, j) = deriv(i, j) + c.beta[i] * at_left[j];
    }
  }
  return c;
}

SlabQuadrature map_to_slab(const RadauRule& rule, double t_prev, double tau) {
  if (!(tau > 0.0)) {
    throw std::invalid_argument("map_to_slab: tau must be positive");
  }
  SlabQuadrature q;
  q.points.resize(rule.size());
  q.weights.resize(rule.size());
  for (std::size_t j = 0; j < rule.size(); ++j) {
    q.points[j] = t_prev + 0.5 * tau * (rule.points[j] + 1.0);
    q.weights[j] = 0.5 * tau * rule.weights[j];
  }
  q.points.back() = t_prev + tau;
  return q;
}

TimePartition::TimePartition(std::vector<double> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.size() < 2) {
    throw std::invalid_argument("TimePartition: need at least one slab");
  }
  if (nodes_.front() != 0.0) {
    throw std::invalid_argument("TimePartition: first node must be 0");
  }
  for (std::size_t n = 1; n < nodes_.size(); ++n) {
    if (!(nodes_[n] > nodes_[n - 1])) {
      throw std::invalid_argument("TimePartition: nodes must be strictly increasing");
    }
  }
}

TimePartition TimePartition::uniform(double final_time, std::size_t num_slabs) {
  if (num_slabs == 0 || !(final_time > 0.0)) {
    throw std::invalid_argument("TimePartition::uniform: invalid arguments");
  }
  std::vector<double> nodes(num_slabs + 1);
  for (std::size_t n = 0; n <= num_slabs; ++n) {
    nodes[n] = final_time * static_cast<double>(n) / static_cast<double>(num_slabs);
  }
  nodes.back() = final_time;
  return TimePartition(std::move(nodes));
}

double TimePartition::max_tau() const {
  double m = 0.0;
  for (std::size_t n = 1; n <= num_slabs(); ++n) {
    m = std::max(m, tau(n));
  }
  return m;
}

double TimePartition::min_tau() const {
  double m = tau(1);
  for (std::size_t n = 2; n <= num_slabs(); ++n) {
    m = std::min(m, tau(n));
  }
  return m;
}

}  // namespace lpsdg
