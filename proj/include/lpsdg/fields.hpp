#pragma once

#include <functional>

#include <Eigen/Core>

#include "lpsdg/mesh.hpp"

namespace lpsdg {

using Vec2 = Eigen::Vector2d;
/// grad(c, d) = d u_c / d x_d.
using Mat2 = Eigen::Matrix2d;

using VectorField = std::function<Vec2(double t, const Point2& x)>;
using ScalarField = std::function<double(double t, const Point2& x)>;
using TensorField = std::function<Mat2(double t, const Point2& x)>;

}  // namespace lpsdg
