#include "lpsdg/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lpsdg {

LegendreValue legendre(int n, double x) {
  if (n == 0) {
    return {1.0, 0.0};
  }
  double p_prev = 1.0;
  double p = x;
  for (int m = 2; m <= n; ++m) {
    const double p_next = ((2.0 * m - 1.0) * x * p - (m - 1.0) * p_prev) / m;
    p_prev = p;
    p = p_next;
  }
  // P'_n from P_n, P_{n-1}; endpoints handled by the closed form n(n+1)/2.
  double dp;
  if (std::abs(1.0 - x * x) < 1e-300) {
    dp = (x > 0.0 ? 1.0 : ((n % 2 == 0) ? -1.0 : 1.0)) * 0.5 * n * (n + 1.0);
  } else {
    dp = n * (x * p - p_prev) / (x * x - 1.0);
  }
  return {p, dp};
}

QuadratureRule1D gauss_legendre(int n) {
  if (n < 1 || n > 64) {
    throw std::invalid_argument("gauss_legendre: unsupported point count");
  }
  QuadratureRule1D rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Chebyshev-like initial guess, then Newton.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      const auto [p, dp] = legendre(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) {
        break;
      }
    }
    const double dp = legendre(n, x).derivative;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.points[i] = -x;
    rule.points[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) {
    rule.points[n / 2] = 0.0;
  }
  return rule;
}

QuadratureRule2D tensor_gauss(int n) {
  const QuadratureRule1D line = gauss_legendre(n);
  QuadratureRule2D rule;
  rule.points.reserve(line.size() * line.size());
  rule.weights.reserve(line.size() * line.size());
  for (std::size_t j = 0; j < line.size(); ++j) {
    for (std::size_t i = 0; i < line.size(); ++i) {
      rule.points.emplace_back(line.points[i], line.points[j]);
      rule.weights.push_back(line.weights[i] * line.weights[j]);
    }
  }
  return rule;
}

}  // namespace lpsdg
