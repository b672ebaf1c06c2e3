#include "properties.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>
#include <Eigen/SparseLU>

namespace lpsdg::checks {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

Eigen::VectorXd random_vector(Eigen::Index n, std::mt19937& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    v[i] = d(rng);
  }
  return v;
}

double energy(const SparseMatrix& m, const FieldCoefficients& u) { return u.dot(m * u); }

}  // namespace

double radau_exactness_error(int k) {
  const RadauRule rule = gauss_radau(k);
  double worst = 0.0;
  for (int m = 0; m <= 2 * k; ++m) {
    double s = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      s += rule.weights[i] * std::pow(rule.points[i], m);
    }
    const double exact = m % 2 == 0 ? 2.0 / (m + 1) : 0.0;
    worst = std::max(worst, std::abs(s - exact));
  }
  return worst;
}

double row_sum_error(int k) {
  const SlabCoefficients c = slab_coefficients(gauss_radau(k));
  return (c.alpha.rowwise().sum() - c.beta).lpNorm<Eigen::Infinity>();
}

double closed_form_error() {
  const SlabCoefficients c0 = slab_coefficients(gauss_radau(0));
  const SlabCoefficients c1 = slab_coefficients(gauss_radau(1));
  Eigen::Matrix2d alpha1;
  alpha1 << 0.75, 0.25, -2.25, 1.25;
  double e = std::max(std::abs(c0.alpha(0, 0) - 0.5), std::abs(c0.beta[0] - 0.5));
  e = std::max(e, (c1.alpha - alpha1).lpNorm<Eigen::Infinity>());
  e = std::max(e, (c1.beta - Eigen::Vector2d(1.0, -1.0)).lpNorm<Eigen::Infinity>());
  return e;
}

double skew_symmetry_error(int pairs, std::uint32_t seed) {
  const Discretization disc(2, 2, true);
  std::mt19937 rng(seed);
  const auto n = idx(disc.velocity().dim());
  double worst = 0.0;
  for (int p = 0; p < pairs; ++p) {
    const Eigen::VectorXd u = random_vector(n, rng);
    const Eigen::VectorXd v = random_vector(n, rng);
    worst = std::max(worst, std::abs(v.dot(assemble_convection(disc, u) * v)));
  }
  return worst;
}

std::vector<double> convection_fd_errors(const std::vector<double>& eps, std::uint32_t seed) {
  const Discretization disc(2, 2, true);
  std::mt19937 rng(seed);
  const auto n = idx(disc.velocity().dim());
  const Eigen::VectorXd u = random_vector(n, rng);
  const Eigen::VectorXd delta = random_vector(n, rng);
  const Eigen::VectorXd base = convection_residual(disc, u);
  const Eigen::VectorXd jd = convection_jacobian(disc, u) * delta;
  std::vector<double> out;
  for (const double e : eps) {
    const Eigen::VectorXd fd = (convection_residual(disc, u + e * delta) - base) / e;
    out.push_back((fd - jd).lpNorm<Eigen::Infinity>());
  }
  return out;
}

StabilizationCheck stabilization_check(int level, int r, std::uint32_t seed) {
  const Discretization disc(level, r, true);
  const SparseMatrix s = assemble_Sh(disc.velocity(), disc.projector(), StabParams(0.1));
  const Eigen::MatrixXd d(s);
  StabilizationCheck out;
  const double scale = d.lpNorm<Eigen::Infinity>();
  out.asymmetry = (d - d.transpose()).lpNorm<Eigen::Infinity>() / scale;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(d, Eigen::EigenvaluesOnly);
  out.min_eigenvalue = eig.eigenvalues().minCoeff() / eig.eigenvalues().maxCoeff();
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    double a[6];
    for (double& x : a) {
      x = coef(rng);
    }
    const Eigen::VectorXd u = interpolate(disc.velocity(), [&](const Point2& x) -> Vec2 {
      return Vec2(a[0] + a[1] * x.x() + a[2] * x.y(), a[3] + a[4] * x.x() + a[5] * x.y());
    });
    out.linear_residual = std::max(out.linear_residual, (s * u).lpNorm<Eigen::Infinity>());
  }
  return out;
}

EnergyRun unforced_run(int level, int r, int k, double nu, double tau, std::size_t slabs,
                       std::uint32_t seed) {
  const Discretization disc(level, r, true);
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  double a[2][3][3];
  for (auto& comp : a) {
    for (auto& row : comp) {
      for (double& x : row) {
        x = coef(rng);
      }
    }
  }
  const double pi = std::numbers::pi;
  ProblemData data;
  data.nu = nu;
  data.mu = 0.1;
  data.forcing = [](double, const Point2&) -> Vec2 { return Vec2::Zero(); };
  data.boundary = data.forcing;
  data.initial = [a, pi](double, const Point2& x) -> Vec2 {
    Vec2 v = Vec2::Zero();
    for (int c = 0; c < 2; ++c) {
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          v[c] += a[c][i][j] * std::sin((i + 1) * pi * x.x()) * std::sin((j + 1) * pi * x.y());
        }
      }
    }
    return v;
  };

  SlabSolver solver(disc, k, data);
  const TrajectoryRecord traj =
      solver.advance(TimePartition::uniform(tau * static_cast<double>(slabs), slabs));
  const StageSystem& sys = solver.system(tau);
  const SparseMatrix& m = sys.mass();
  const SparseMatrix& as = sys.viscous_plus_stabilization();
  const RadauRule& rule = traj.rule;

  EnergyRun out;
  out.energy.push_back(std::sqrt(energy(m, traj.initial)));
  for (std::size_t n = 1; n <= slabs; ++n) {
    const SlabState& slab = traj.slabs[n - 1];
    const FieldCoefficients& prev = traj.left_limit(n - 1);
    const FieldCoefficients& last = traj.left_limit(n);
    out.energy.push_back(std::sqrt(energy(m, last)));

    double dissipation = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      dissipation += rule.weights[i] * slab.velocity[i].dot(as * slab.velocity[i]);
      out.max_divergence = std::max(
          out.max_divergence, (sys.divergence() * slab.velocity[i]).lpNorm<Eigen::Infinity>());
      out.max_pressure_mean =
          std::max(out.max_pressure_mean, std::abs(sys.mean_weights().dot(slab.pressure[i])));
    }
    const FieldCoefficients jump = traj.right_limit(n) - prev;
    const double balance = 0.5 * energy(m, last) - 0.5 * energy(m, prev) +
                           0.5 * energy(m, jump) + 0.5 * tau * dissipation;
    out.identity_residual.push_back(std::abs(balance) / (0.5 * energy(m, prev)));
  }
  return out;
}

ForcedRun forced_run(int level, int r, int k, double tau, std::size_t slabs) {
  const Discretization disc(level, r, true);
  const ManufacturedCase mc = case_space_dominant(1e-2);
  SlabSolver solver(disc, k, mc.problem(0.1));
  const TrajectoryRecord traj =
      solver.advance(TimePartition::uniform(tau * static_cast<double>(slabs), slabs));
  const StageSystem& sys = solver.system(tau);
  ForcedRun out;
  for (const SlabState& slab : traj.slabs) {
    for (std::size_t i = 0; i < slab.velocity.size(); ++i) {
      out.max_divergence = std::max(
          out.max_divergence, (sys.divergence() * slab.velocity[i]).lpNorm<Eigen::Infinity>());
      out.max_pressure_mean =
          std::max(out.max_pressure_mean, std::abs(sys.mean_weights().dot(slab.pressure[i])));
    }
  }
  return out;
}

double steady_snorm(int level, int r, int k, double tau, std::size_t slabs) {
  const Discretization disc(level, r, true);
  const ManufacturedCase mc = case_steady_check(1e-6);
  SlabSolver solver(disc, k, mc.problem(0.1));
  const TrajectoryRecord traj =
      solver.advance(TimePartition::uniform(tau * static_cast<double>(slabs), slabs));
  return compute_errors(disc, traj, mc, 0.1).snorm();
}

double backward_euler_difference(int level, int r, double tau) {
  const Discretization disc(level, r, true);
  const ManufacturedCase mc = case_space_dominant(1e-2);
  const double mu = 0.1;
  const double t0 = 0.3;
  const double t1 = t0 + tau;
  const FieldCoefficients u0 =
      interpolate(disc.velocity(), [&](const Point2& x) { return mc.velocity(t0, x); });

  // dG(0) slab.
  SlabSolver solver(disc, 0, mc.problem(mu));
  const SlabState slab = solver.solve_slab(u0, t0, tau);

  // Backward Euler: M (U - U0) / tau + (A + S) U + N(U) U - B^T P = L(t1),
  // B U + lambda g = 0, g^T P = 0, boundary rows U_d = g(t1).
  const SparseMatrix m = assemble_mass(disc);
  const StokesBlocks st = assemble_stokes(disc, mc.nu);
  const SparseMatrix k = SparseMatrix(m / tau) + st.viscous +
                         assemble_Sh(disc.velocity(), disc.projector(), StabParams(mu));
  const SparseMatrix& b = st.divergence;
  const Eigen::VectorXd g = pressure_mean_weights(disc);
  const FieldCoefficients load = assemble_load(disc, mc.problem(mu).forcing, t1);
  const auto nv = idx(disc.velocity().dim());
  const auto np = idx(disc.pressure().dim());
  const auto n = nv + np + 1;

  std::vector<char> fixed(static_cast<std::size_t>(nv), 0);
  const auto bc = dirichlet_values(disc.velocity(), mc.velocity, t1);
  for (const auto& [dof, value] : bc) {
    fixed[dof] = 1;
  }

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  x.head(nv) = u0;
  for (const auto& [dof, value] : bc) {
    x[idx(dof)] = value;
  }

  for (int iter = 0; iter < 30; ++iter) {
    const Eigen::VectorXd u = x.head(nv);
    const Eigen::VectorXd p = x.segment(nv, np);
    const double lambda = x[n - 1];
    Eigen::VectorXd res(n);
    res.head(nv) = k * u - m * u0 / tau + convection_residual(disc, u) - b.transpose() * p - load;
    res.segment(nv, np) = b * u + lambda * g;
    res[n - 1] = g.dot(p);
    for (const auto& [dof, value] : bc) {
      res[idx(dof)] = u[idx(dof)] - value;
    }
    if (res.lpNorm<Eigen::Infinity>() < 1e-14) {
      break;
    }
    const SparseMatrix kv = k + convection_jacobian(disc, u);
    std::vector<Triplet> t;
    for (int c = 0; c < kv.outerSize(); ++c) {
      for (SparseMatrix::InnerIterator it(kv, c); it; ++it) {
        if (!fixed[static_cast<std::size_t>(it.row())]) {
          t.emplace_back(static_cast<int>(it.row()), c, it.value());
        }
      }
    }
    for (int c = 0; c < b.outerSize(); ++c) {
      for (SparseMatrix::InnerIterator it(b, c); it; ++it) {
        t.emplace_back(static_cast<int>(nv + it.row()), c, it.value());
        if (!fixed[static_cast<std::size_t>(c)]) {
          t.emplace_back(c, static_cast<int>(nv + it.row()), -it.value());
        }
      }
    }
    for (Eigen::Index i = 0; i < np; ++i) {
      t.emplace_back(static_cast<int>(nv + i), static_cast<int>(n - 1), g[i]);
      t.emplace_back(static_cast<int>(n - 1), static_cast<int>(nv + i), g[i]);
    }
    for (const auto& [dof, value] : bc) {
      t.emplace_back(static_cast<int>(dof), static_cast<int>(dof), 1.0);
    }
    SparseMatrix j(n, n);
    j.setFromTriplets(t.begin(), t.end());
    Eigen::SparseLU<SparseMatrix> lu(j);
    x -= lu.solve(res);
  }
  const double du = (x.head(nv) - slab.velocity[0]).lpNorm<Eigen::Infinity>();
  const double dp = (x.segment(nv, np) - slab.pressure[0]).lpNorm<Eigen::Infinity>();
  return std::max(du, dp);
}

}  // namespace lpsdg::checks
