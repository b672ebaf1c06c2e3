#include "lpsdg/verification.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "lpsdg/quadrature.hpp"

namespace lpsdg {

namespace {

constexpr double pi = std::numbers::pi;

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

// One-dimensional factor X(s) = s^2 (1 - s)^2 of the stream function and its derivatives.
struct Quartic {
  double v, d1, d2, d3;
};

Quartic quartic(double s) {
  return {s * s * (1 - s) * (1 - s), 2 * s - 6 * s * s + 4 * s * s * s,
          2 - 12 * s + 12 * s * s, -12 + 24 * s};
}

// Velocity part shared by the two time-dominant cases: u = (X Y', -X' Y) S(t).
void set_stream_velocity(ManufacturedCase& mc) {
  const double w = 10.0 * pi;
  mc.homogeneous = true;
  mc.velocity = [w](double t, const Point2& x) -> Vec2 {
    const Quartic X = quartic(x[0]), Y = quartic(x[1]);
    return Vec2(X.v * Y.d1, -X.d1 * Y.v) * std::sin(w * t);
  };
  mc.gradient = [w](double t, const Point2& x) -> Mat2 {
    const Quartic X = quartic(x[0]), Y = quartic(x[1]);
    Mat2 g;
    g << X.d1 * Y.d1, X.v * Y.d2, -X.d2 * Y.v, -X.d1 * Y.d1;
    return g * std::sin(w * t);
  };
  mc.time_derivative = [w](double t, const Point2& x) -> Vec2 {
    const Quartic X = quartic(x[0]), Y = quartic(x[1]);
    return Vec2(X.v * Y.d1, -X.d1 * Y.v) * (w * std::cos(w * t));
  };
  mc.laplacian = [w](double t, const Point2& x) -> Vec2 {
    const Quartic X = quartic(x[0]), Y = quartic(x[1]);
    return Vec2(X.d2 * Y.d1 + X.v * Y.d3, -(X.d3 * Y.v + X.d1 * Y.d2)) * std::sin(w * t);
  };
}

// Pressure -(x^3 + y^3 - 0.5) a(t).
template <class Amplitude>
void set_cubic_pressure(ManufacturedCase& mc, Amplitude a) {
  mc.pressure = [a](double t, const Point2& x) {
    return -(x[0] * x[0] * x[0] + x[1] * x[1] * x[1] - 0.5) * a(t);
  };
  mc.pressure_gradient = [a](double t, const Point2& x) -> Vec2 {
    return Vec2(-3.0 * x[0] * x[0], -3.0 * x[1] * x[1]) * a(t);
  };
}

// Sum of per-cell contributions in cell order, independent of the thread count.
template <class Fn>
double cell_sum(const Discretization& disc, Fn fn) {
  std::vector<double> parts(disc.mesh().num_cells(), 0.0);
  disc.for_each_cell([&](std::size_t c) { parts[c] = fn(c); });
  double s = 0.0;
  for (const double v : parts) {
    s += v;
  }
  return s;
}

double squared_l2(const Discretization& disc, const FieldCoefficients& uh, const VectorField& u,
                  double t) {
  const Eigen::VectorXd& w = disc.weights();
  return cell_sum(disc, [&](std::size_t c) {
    const Eigen::MatrixX2d vals = disc.evaluate_velocity(uh, c).values;
    const auto pts = disc.points(c);
    double s = 0.0;
    for (std::size_t q = 0; q < pts.size(); ++q) {
      const Vec2 e = u(t, pts[q]) - vals.row(idx(q)).transpose();
      s += w[idx(q)] * e.squaredNorm();
    }
    return s;
  });
}

double squared_l2_difference(const Discretization& disc, const FieldCoefficients& a,
                             const FieldCoefficients& b) {
  const FieldCoefficients d = a - b;
  const Eigen::VectorXd& w = disc.weights();
  return cell_sum(disc, [&](std::size_t c) {
    const Eigen::MatrixX2d vals = disc.evaluate_velocity(d, c).values;
    return (w.asDiagonal() * vals.rowwise().squaredNorm()).sum();
  });
}

struct GradientErrors {
  double viscous = 0.0;
  double stabilization = 0.0;
};

// nu |grad e|^2 and S_h(e, e) = mu sum_K |kappa_K grad e|_K^2 at time t.
GradientErrors gradient_errors(const Discretization& disc, const FieldCoefficients& uh,
                               const TensorField& grad_u, double t, double nu, double mu) {
  const Eigen::VectorXd& w = disc.weights();
  const std::size_t n = disc.mesh().num_cells();
  std::vector<GradientErrors> parts(n);
  disc.for_each_cell([&](std::size_t c) {
    const CellFieldValues vals = disc.evaluate_velocity(uh, c);
    const auto pts = disc.points(c);
    const auto nq = idx(pts.size());
    // Columns: d e_1/dx, d e_1/dy, d e_2/dx, d e_2/dy.
    Eigen::MatrixXd ge(nq, 4);
    for (Eigen::Index q = 0; q < nq; ++q) {
      const Mat2 g = grad_u(t, pts[static_cast<std::size_t>(q)]);
      ge(q, 0) = g(0, 0) - vals.dx(q, 0);
      ge(q, 1) = g(0, 1) - vals.dy(q, 0);
      ge(q, 2) = g(1, 0) - vals.dx(q, 1);
      ge(q, 3) = g(1, 1) - vals.dy(q, 1);
    }
    GradientErrors& out = parts[c];
    for (Eigen::Index j = 0; j < 4; ++j) {
      out.viscous += nu * w.dot(ge.col(j).cwiseAbs2());
      if (mu > 0.0) {
        out.stabilization += mu * disc.projector().fluctuation_norm_squared(ge.col(j));
      }
    }
  });
  GradientErrors total;
  for (const GradientErrors& p : parts) {
    total.viscous += p.viscous;
    total.stabilization += p.stabilization;
  }
  return total;
}

// |(p - mean p) - (p_h - mean p_h)|^2 on the unit square.
double squared_pressure_error(const Discretization& disc, const FieldCoefficients& ph,
                              const ScalarField& p, double t) {
  const Eigen::VectorXd& w = disc.weights();
  const std::size_t n = disc.mesh().num_cells();
  std::vector<Eigen::VectorXd> exact(n), discrete(n);
  disc.for_each_cell([&](std::size_t c) {
    const auto pts = disc.points(c);
    exact[c].resize(idx(pts.size()));
    for (std::size_t q = 0; q < pts.size(); ++q) {
      exact[c][idx(q)] = p(t, pts[q]);
    }
    discrete[c] = disc.evaluate_pressure(ph, c);
  });
  double mean_exact = 0.0, mean_discrete = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    mean_exact += w.dot(exact[c]);
    mean_discrete += w.dot(discrete[c]);
  }
  double s = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    const Eigen::VectorXd e =
        (exact[c].array() - mean_exact) - (discrete[c].array() - mean_discrete);
    s += w.dot(e.cwiseAbs2());
  }
  return s;
}

double sum_of(const std::vector<SlabErrors>& slabs, double SlabErrors::*field) {
  double s = 0.0;
  for (const SlabErrors& e : slabs) {
    s += e.*field;
  }
  return s;
}

}  // namespace

Vec2 ManufacturedCase::forcing(double t, const Point2& x) const {
  const Vec2 u = velocity(t, x);
  return time_derivative(t, x) - nu * laplacian(t, x) + gradient(t, x) * u +
         pressure_gradient(t, x);
}

ProblemData ManufacturedCase::problem(double mu) const {
  ProblemData d;
  d.nu = nu;
  d.mu = mu;
  const ManufacturedCase self = *this;
  d.forcing = [self](double t, const Point2& x) -> Vec2 { return self.forcing(t, x); };
  d.boundary = velocity;
  d.initial = velocity;
  return d;
}

ManufacturedCase case_space_dominant(double nu) {
  ManufacturedCase mc;
  mc.name = "space_dominant";
  mc.nu = nu;
  mc.homogeneous = false;
  mc.velocity = [](double t, const Point2& x) -> Vec2 {
    const double sx = std::sin(pi * x[0]), cx = std::cos(pi * x[0]);
    const double sy = std::sin(pi * x[1]), cy = std::cos(pi * x[1]);
    return Vec2(sx * sy, cx * cy) * std::sin(t);
  };
  mc.gradient = [](double t, const Point2& x) -> Mat2 {
    const double sx = std::sin(pi * x[0]), cx = std::cos(pi * x[0]);
    const double sy = std::sin(pi * x[1]), cy = std::cos(pi * x[1]);
    Mat2 g;
    g << pi * cx * sy, pi * sx * cy, -pi * sx * cy, -pi * cx * sy;
    return g * std::sin(t);
  };
  mc.time_derivative = [](double t, const Point2& x) -> Vec2 {
    const double sx = std::sin(pi * x[0]), cx = std::cos(pi * x[0]);
    const double sy = std::sin(pi * x[1]), cy = std::cos(pi * x[1]);
    return Vec2(sx * sy, cx * cy) * std::cos(t);
  };
  mc.laplacian = [](double t, const Point2& x) -> Vec2 {
    const double sx = std::sin(pi * x[0]), cx = std::cos(pi * x[0]);
    const double sy = std::sin(pi * x[1]), cy = std::cos(pi * x[1]);
    return Vec2(sx * sy, cx * cy) * (-2.0 * pi * pi * std::sin(t));
  };
  mc.pressure = [](double t, const Point2& x) {
    return std::sin(t) * (std::sin(pi * x[0]) + std::cos(pi * x[1]) - 2.0 / pi);
  };
  mc.pressure_gradient = [](double t, const Point2& x) -> Vec2 {
    return Vec2(pi * std::cos(pi * x[0]), -pi * std::sin(pi * x[1])) * std::sin(t);
  };
  return mc;
}

ManufacturedCase case_time_dominant(double nu) {
  ManufacturedCase mc;
  mc.name = "time_dominant";
  mc.nu = nu;
  set_stream_velocity(mc);
  set_cubic_pressure(mc, [](double t) { return 1.5 + 0.5 * std::sin(10.0 * pi * t); });
  return mc;
}

ManufacturedCase case_rough_pressure(double nu) {
  ManufacturedCase mc;
  mc.name = "rough_pressure";
  mc.nu = nu;
  set_stream_velocity(mc);
  set_cubic_pressure(mc, [](double t) { return 1.5 + 0.5 * std::pow(t, 4.0 / 3.0); });
  return mc;
}

ManufacturedCase case_steady_check(double nu) {
  ManufacturedCase mc;
  mc.name = "steady_check";
  mc.nu = nu;
  mc.homogeneous = false;
  mc.velocity = [](double, const Point2& x) -> Vec2 { return Vec2(x[1], x[0]); };
  mc.gradient = [](double, const Point2&) -> Mat2 {
    Mat2 g;
    g << 0.0, 1.0, 1.0, 0.0;
    return g;
  };
  mc.time_derivative = [](double, const Point2&) -> Vec2 { return Vec2::Zero(); };
  mc.laplacian = [](double, const Point2&) -> Vec2 { return Vec2::Zero(); };
  mc.pressure = [](double, const Point2&) { return 0.0; };
  mc.pressure_gradient = [](double, const Point2&) -> Vec2 { return Vec2::Zero(); };
  return mc;
}

std::vector<std::string> case_names() {
  return {"space_dominant", "time_dominant", "rough_pressure", "steady_check"};
}

ManufacturedCase make_case(const std::string& name, double nu) {
  if (name == "space_dominant") return case_space_dominant(nu);
  if (name == "time_dominant") return case_time_dominant(nu);
  if (name == "rough_pressure") return case_rough_pressure(nu);
  if (name == "steady_check") return case_steady_check(nu);
  throw std::invalid_argument("unknown case '" + name + "'");
}

double ErrorReport::l2l2_velocity() const {
  return std::sqrt(sum_of(slabs, &SlabErrors::l2_gauss));
}
double ErrorReport::l2l2_velocity_radau() const {
  return std::sqrt(sum_of(slabs, &SlabErrors::l2));
}
double ErrorReport::l2l2_pressure() const {
  return std::sqrt(sum_of(slabs, &SlabErrors::pressure_gauss));
}
double ErrorReport::l2l2_pressure_radau() const {
  return std::sqrt(sum_of(slabs, &SlabErrors::pressure));
}
double ErrorReport::jump() const { return std::sqrt(sum_of(slabs, &SlabErrors::jump)); }
double ErrorReport::gradient() const { return std::sqrt(sum_of(slabs, &SlabErrors::gradient)); }
double ErrorReport::stabilization() const {
  return std::sqrt(sum_of(slabs, &SlabErrors::stabilization));
}
std::optional<double> ErrorReport::l2l2_postprocessed() const {
  if (!has_postprocessed) {
    return std::nullopt;
  }
  return std::sqrt(sum_of(slabs, &SlabErrors::postprocessed));
}

double ErrorReport::snorm() const {
  double s = final_velocity * final_velocity;
  for (const SlabErrors& e : slabs) {
    s += e.jump + e.gradient + e.stabilization + e.l2;
  }
  return std::sqrt(s);
}

ErrorReport compute_errors(const Discretization& disc, const TrajectoryRecord& trajectory,
                           const ManufacturedCase& mc, double mu,
                           const PostprocessedTrajectory* postprocessed) {
  const TimePartition& partition = trajectory.partition;
  const RadauRule& rule = trajectory.rule;
  const QuadratureRule1D gauss = gauss_legendre(rule.k + 3);
  const LagrangeBasis1D stage_basis(rule.points);

  ErrorReport report;
  report.has_postprocessed = postprocessed != nullptr;
  report.slabs.resize(trajectory.slabs.size());
  for (std::size_t n = 1; n <= trajectory.slabs.size(); ++n) {
    const SlabState& slab = trajectory.slabs[n - 1];
    const double t0 = partition.start(n);
    const double half = 0.5 * partition.tau(n);
    SlabErrors& out = report.slabs[n - 1];

    for (std::size_t i = 0; i < rule.size(); ++i) {
      const double t = t0 + half * (1.0 + rule.points[i]);
      const double w = half * rule.weights[i];
      out.l2 += w * squared_l2(disc, slab.velocity[i], mc.velocity, t);
      const GradientErrors g = gradient_errors(disc, slab.velocity[i], mc.gradient, t, mc.nu, mu);
      out.gradient += w * g.viscous;
      out.stabilization += w * g.stabilization;
      out.pressure += w * squared_pressure_error(disc, slab.pressure[i], mc.pressure, t);
    }

    for (std::size_t q = 0; q < gauss.size(); ++q) {
      const double t_hat = gauss.points[q];
      const double t = t0 + half * (1.0 + t_hat);
      const double w = half * gauss.weights[q];
      const Eigen::VectorXd phi = stage_basis.values(t_hat);
      FieldCoefficients u = phi[0] * slab.velocity[0];
      FieldCoefficients p = phi[0] * slab.pressure[0];
      for (std::size_t j = 1; j < rule.size(); ++j) {
        u += phi[idx(j)] * slab.velocity[j];
        p += phi[idx(j)] * slab.pressure[j];
      }
      out.l2_gauss += w * squared_l2(disc, u, mc.velocity, t);
      out.pressure_gauss += w * squared_pressure_error(disc, p, mc.pressure, t);
      if (postprocessed != nullptr) {
        out.postprocessed +=
            w * squared_l2(disc, postprocessed->evaluate_on_slab(n, t_hat), mc.velocity, t);
      }
    }

    // The exact solution is continuous, so [e] = -[u_h].
    out.jump = squared_l2_difference(disc, trajectory.right_limit(n), trajectory.left_limit(n - 1));
  }
  const std::size_t last = trajectory.slabs.size();
  report.final_velocity =
      std::sqrt(squared_l2(disc, trajectory.left_limit(last), mc.velocity,
                           last == 0 ? 0.0 : partition.end(last)));
  return report;
}

double velocity_l2_error(const Discretization& disc, const FieldCoefficients& uh,
                         const VectorField& u, double t) {
  return std::sqrt(squared_l2(disc, uh, u, t));
}

double velocity_l2_error(const Discretization& disc, const FieldCoefficients& uh,
                         const VectorField& u, double t, int points) {
  const QuadratureRule2D rule = tensor_gauss(points);
  const ElementTable table = tabulate(disc.velocity().element(), rule);
  const Mesh& mesh = disc.mesh();
  const double det = mesh.jacobian_det();
  double s = 0.0;
  for (const Cell& cell : mesh.cells()) {
    const Eigen::MatrixX2d vals = table.values * disc.gather(uh, cell.index);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Point2 x = mesh.reference_map(cell, rule.points[q]).x;
      const Vec2 e = u(t, x) - vals.row(idx(q)).transpose();
      s += rule.weights[q] * det * e.squaredNorm();
    }
  }
  return std::sqrt(s);
}

double pressure_mean(const ScalarField& p, double t, int points) {
  const QuadratureRule2D rule = tensor_gauss(points);
  double s = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Point2 x = 0.5 * (rule.points[q] + Point2::Ones());
    s += 0.25 * rule.weights[q] * p(t, x);
  }
  return s;
}

EOCTable eoc(std::span<const double> errors, std::span<const double> params) {
  if (errors.size() != params.size() || errors.size() < 2) {
    throw std::invalid_argument("eoc: need equally long lists with at least two entries");
  }
  EOCTable table;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!(params[i] > 0.0)) {
      throw std::invalid_argument("eoc: parameters must be positive");
    }
    EOCRow row{params[i], errors[i], std::nullopt};
    if (i > 0) {
      if (params[i] == params[i - 1]) {
        throw std::invalid_argument("eoc: repeated parameter");
      }
      if (errors[i] > 0.0 && errors[i - 1] > 0.0) {
        row.order = std::log(errors[i - 1] / errors[i]) / std::log(params[i - 1] / params[i]);
      }
    }
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace lpsdg
