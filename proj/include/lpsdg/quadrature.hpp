#pragma once

#include <vector>

#include "lpsdg/mesh.hpp"

namespace lpsdg {

struct QuadratureRule1D {
  std::vector<double> points;
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
};

struct QuadratureRule2D {
  std::vector<Point2> points;
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
};

/// n-point Gauss-Legendre rule on [-1, 1], exact for degree 2n - 1.
QuadratureRule1D gauss_legendre(int n);

/// Tensor-product Gauss-Legendre rule on (-1,1)^2, x index fastest.
QuadratureRule2D tensor_gauss(int n);

/// Legendre polynomial P_n(x) and its derivative via the three-term recurrence.
struct LegendreValue {
  double value;
  double derivative;
};
LegendreValue legendre(int n, double x);

}  // namespace lpsdg
