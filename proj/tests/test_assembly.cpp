#include "doctest.h"

#include <cmath>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

#include "lpsdg/assembly.hpp"
#include "lpsdg/verification.hpp"

using namespace lpsdg;

namespace {

Eigen::VectorXd random_vector(Eigen::Index n, std::mt19937& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    v[i] = d(rng);
  }
  return v;
}

Eigen::VectorXd zero_boundary(const VelocitySpace& space, Eigen::VectorXd v) {
  for (std::size_t s : space.boundary_dofs()) {
    v[static_cast<Eigen::Index>(2 * s)] = 0.0;
    v[static_cast<Eigen::Index>(2 * s + 1)] = 0.0;
  }
  return v;
}

// n(u, v, w) = ((u . grad) v, w) + 1/2 (div u, v . w), summed by the
// discretization's quadrature from pointwise field values.
double trilinear_oracle(const Discretization& disc, const Eigen::VectorXd& u,
                        const Eigen::VectorXd& v, const Eigen::VectorXd& w) {
  double sum = 0.0;
  for (std::size_t c = 0; c < disc.mesh().num_cells(); ++c) {
    const CellFieldValues fu = disc.evaluate_velocity(u, c);
    const CellFieldValues fv = disc.evaluate_velocity(v, c);
    const CellFieldValues fw = disc.evaluate_velocity(w, c);
    for (Eigen::Index q = 0; q < disc.weights().size(); ++q) {
      double conv = 0.0;
      for (int comp = 0; comp < 2; ++comp) {
        const double ugv = fu.values(q, 0) * fv.dx(q, comp) + fu.values(q, 1) * fv.dy(q, comp);
        conv += ugv * fw.values(q, comp);
      }
      const double div_u = fu.dx(q, 0) + fu.dy(q, 1);
      const double vw = fv.values.row(q).dot(fw.values.row(q));
      sum += disc.weights()[q] * (conv + 0.5 * div_u * vw);
    }
  }
  return sum;
}

}  // namespace

TEST_CASE("mass matrix") {
  const Discretization disc(1, 2, true);
  const SparseMatrix m = assemble_mass(disc);
  const Eigen::VectorXd one =
      interpolate(disc.velocity(), [](const Point2&) -> Vec2 { return Vec2(1.0, 0.0); });
  CHECK(one.dot(m * one) == doctest::Approx(1.0).epsilon(1e-12));
  const Eigen::MatrixXd dm(m);
  CHECK((dm - dm.transpose()).lpNorm<Eigen::Infinity>() == 0.0);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dm);
  CHECK(eig.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("stokes blocks") {
  const double nu = 0.37;
  const Discretization disc(2, 3, true);
  const StokesBlocks sb = assemble_stokes(disc, nu);
  const StokesBlocks unit = assemble_stokes(disc, 1.0);
  CHECK(sb.divergence.rows() == static_cast<Eigen::Index>(disc.pressure().dim()));
  CHECK(sb.divergence.cols() == static_cast<Eigen::Index>(disc.velocity().dim()));

  const Eigen::VectorXd yx =
      interpolate(disc.velocity(), [](const Point2& x) -> Vec2 { return Vec2(x.y(), x.x()); });
  CHECK(yx.dot(sb.viscous * yx) == doctest::Approx(2.0 * nu).epsilon(1e-12));
  // (y, x) is divergence free, so B annihilates it.
  CHECK((sb.divergence * yx).lpNorm<Eigen::Infinity>() < 1e-13);

  // The pressure terms of the saddle-point form cancel: A((v,q),(v,q)) = nu |v|_1^2.
  std::mt19937 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd v = random_vector(yx.size(), rng);
    const Eigen::VectorXd q = random_vector(sb.divergence.rows(), rng);
    const double form = v.dot(sb.viscous * v) - q.dot(sb.divergence * v) + q.dot(sb.divergence * v);
    CHECK(form == doctest::Approx(nu * v.dot(unit.viscous * v)).epsilon(1e-12));
    CHECK(v.dot(sb.viscous * v) > 0.0);
  }

  // (1, div v) = 0 for v vanishing on the boundary.
  const Eigen::VectorXd ones =
      project_pressure(disc.pressure(), [](const Point2&) { return 1.0; });
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::VectorXd v = zero_boundary(disc.velocity(), random_vector(yx.size(), rng));
    CHECK(std::abs(ones.dot(sb.divergence * v)) < 1e-12);
  }
}

TEST_CASE("convection is skew-symmetric in its last two slots") {
  const Discretization disc(2, 2, true);
  std::mt19937 rng(11);
  const auto n = static_cast<Eigen::Index>(disc.velocity().dim());
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::VectorXd u = random_vector(n, rng);
    const Eigen::VectorXd v = random_vector(n, rng);
    const SparseMatrix nu = assemble_convection(disc, u);
    CHECK(std::abs(v.dot(nu * v)) <= 1e-13 * std::max(1.0, v.squaredNorm()));
  }
}

TEST_CASE("convection matches the partially integrated form") {
  // Q2 keeps every product below the exactness degree of the rule, so
  // integration by parts holds at the quadrature level.
  const Discretization disc(2, 2, false);
  std::mt19937 rng(5);
  const auto n = static_cast<Eigen::Index>(disc.velocity().dim());
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::VectorXd u = zero_boundary(disc.velocity(), random_vector(n, rng));
    const Eigen::VectorXd v = random_vector(n, rng);
    const Eigen::VectorXd w = random_vector(n, rng);
    const double value = w.dot(assemble_convection(disc, u) * v);
    CHECK(value == doctest::Approx(trilinear_oracle(disc, u, v, w)).epsilon(1e-11));
  }
}

TEST_CASE("convection residual, zero field and jacobian") {
  const Discretization disc(2, 2, true);
  std::mt19937 rng(9);
  const auto n = static_cast<Eigen::Index>(disc.velocity().dim());
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
  CHECK(Eigen::MatrixXd(assemble_convection(disc, zero)).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(Eigen::MatrixXd(convection_jacobian(disc, zero)).lpNorm<Eigen::Infinity>() == 0.0);

  const Eigen::VectorXd u = random_vector(n, rng);
  const Eigen::VectorXd delta = random_vector(n, rng);
  const Eigen::VectorXd nu = convection_residual(disc, u);
  CHECK((nu - assemble_convection(disc, u) * u).lpNorm<Eigen::Infinity>() < 1e-13);

  const SparseMatrix jac = convection_jacobian(disc, u);
  // Euler identity for the quadratic map u -> N(u) u.
  CHECK((jac * u - 2.0 * nu).lpNorm<Eigen::Infinity>() < 1e-12);

  const Eigen::VectorXd jd = jac * delta;
  double previous = 0.0;
  for (double eps : {1e-4, 1e-5, 1e-6, 1e-7}) {
    const Eigen::VectorXd fd = (convection_residual(disc, u + eps * delta) - nu) / eps;
    const double err = (fd - jd).lpNorm<Eigen::Infinity>();
    // The map is quadratic: the remainder is exactly eps N(delta) delta.
    const double expected = eps * convection_residual(disc, delta).lpNorm<Eigen::Infinity>();
    CHECK(err <= 2.0 * expected + 1e-7);
    if (previous > 0.0 && eps >= 1e-6) {
      CHECK(err < 0.2 * previous);
    }
    previous = err;
  }
}

TEST_CASE("load vector") {
  const Discretization disc(2, 2, true);
  const FieldCoefficients zero =
      assemble_load(disc, [](double, const Point2&) -> Vec2 { return Vec2::Zero(); }, 0.0);
  CHECK(zero.lpNorm<Eigen::Infinity>() == 0.0);

  const FieldCoefficients f =
      assemble_load(disc, [](double, const Point2&) -> Vec2 { return Vec2(1.0, 0.0); }, 0.0);
  const Eigen::VectorXd u =
      interpolate(disc.velocity(), [](const Point2&) -> Vec2 { return Vec2(1.0, 0.0); });
  CHECK(f.dot(u) == doctest::Approx(1.0).epsilon(1e-13));

  // At t = 0 velocity and pressure vanish, leaving f = u_t.
  const ManufacturedCase mc = case_space_dominant();
  const FieldCoefficients f0 =
      assemble_load(disc, [&](double t, const Point2& x) { return mc.forcing(t, x); }, 0.0);
  const FieldCoefficients ut0 = assemble_load(disc, mc.time_derivative, 0.0);
  CHECK((f0 - ut0).lpNorm<Eigen::Infinity>() < 1e-15);
  CHECK(ut0.lpNorm<Eigen::Infinity>() > 1e-3);
}

TEST_CASE("pressure mean weights") {
  const Discretization disc(2, 3, true);
  const Eigen::VectorXd g = pressure_mean_weights(disc);
  const Eigen::VectorXd ones = project_pressure(disc.pressure(), [](const Point2&) { return 1.0; });
  CHECK(g.dot(ones) == doctest::Approx(1.0).epsilon(1e-13));
  const Eigen::VectorXd x = project_pressure(disc.pressure(), [](const Point2& p) { return p.x(); });
  CHECK(g.dot(x) == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("stage system constraints and residual") {
  const Discretization disc(1, 2, true);
  const SlabCoefficients coeffs = slab_coefficients(gauss_radau(1));
  StageSystem sys(disc, coeffs, 0.1, 1e-3, StabParams(0.1));
  const StageLayout& lay = sys.layout();
  CHECK(lay.stages == 2);
  CHECK(lay.size() == 2 * (disc.velocity().dim() + disc.pressure().dim() + 1));

  const Eigen::VectorXd u0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(lay.velocity));
  const std::vector<FieldCoefficients> loads(2, u0);
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(lay.size()));
  const Eigen::VectorXd r0 = sys.residual(x0, u0, loads);
  for (std::size_t i = 0; i < lay.stages; ++i) {
    for (std::size_t d : sys.constrained_dofs()) {
      CHECK(r0[static_cast<Eigen::Index>(lay.velocity_offset(i) + d)] == 0.0);
    }
  }

  // Non-homogeneous data are stored and read back exactly.
  const ManufacturedCase mc = case_space_dominant();
  const SlabQuadrature q = map_to_slab(gauss_radau(1), 0.2, 0.1);
  std::vector<std::vector<std::pair<std::size_t, double>>> bc;
  for (double t : q.points) {
    bc.push_back(dirichlet_values(disc.velocity(), mc.velocity, t));
  }
  sys.apply_constraints(bc);
  Eigen::VectorXd x = x0;
  sys.impose_boundary_values(x);
  for (std::size_t i = 0; i < lay.stages; ++i) {
    for (const auto& [dof, value] : bc[i]) {
      CHECK(x[static_cast<Eigen::Index>(lay.velocity_offset(i) + dof)] == value);
    }
  }
  const Eigen::VectorXd r = sys.residual(x, u0, loads);
  for (std::size_t d : sys.constrained_dofs()) {
    CHECK(r[static_cast<Eigen::Index>(d)] == 0.0);
  }

  auto bad = bc;
  bad[0].pop_back();
  CHECK_THROWS_AS(sys.apply_constraints(bad), std::invalid_argument);
  bad = bc;
  std::swap(bad[1][0], bad[1][1]);
  CHECK_THROWS_AS(sys.apply_constraints(bad), std::invalid_argument);
  CHECK_THROWS_AS(sys.apply_constraints({bc[0]}), std::invalid_argument);
  CHECK_THROWS_AS(sys.residual(x, u0, std::span(loads).first(1)), std::invalid_argument);
  CHECK_THROWS_AS(StageSystem(disc, coeffs, 0.0, 1.0, StabParams(0.1)), std::invalid_argument);
}

TEST_CASE("stage jacobian matches finite differences of the residual") {
  const Discretization disc(1, 2, true);
  const SlabCoefficients coeffs = slab_coefficients(gauss_radau(2));
  const StageSystem sys(disc, coeffs, 0.05, 0.01, StabParams(0.1));
  std::mt19937 rng(21);
  const auto n = static_cast<Eigen::Index>(sys.layout().size());
  const Eigen::VectorXd x = random_vector(n, rng);
  const Eigen::VectorXd dx = random_vector(n, rng);
  const Eigen::VectorXd u0 = random_vector(static_cast<Eigen::Index>(sys.layout().velocity), rng);
  std::vector<FieldCoefficients> loads(3, random_vector(u0.size(), rng));
  const Eigen::VectorXd r = sys.residual(x, u0, loads);
  const Eigen::VectorXd jdx = sys.jacobian(x) * dx;
  const double eps = 1e-6;
  const Eigen::VectorXd fd = (sys.residual(x + eps * dx, u0, loads) - r) / eps;
  CHECK((fd - jdx).lpNorm<Eigen::Infinity>() < 1e-6 * std::max(1.0, jdx.lpNorm<Eigen::Infinity>()));
}

TEST_CASE("linear solver") {
  SparseMatrix id(5, 5);
  id.setIdentity();
  const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(5, 1.0, 5.0);
  CHECK((linear_solve(id, b) - b).lpNorm<Eigen::Infinity>() == 0.0);

  const Discretization disc(2, 2, true);
  const SparseMatrix m = assemble_mass(disc);
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(m.rows());
  CHECK((linear_solve(m, m * one) - one).lpNorm<Eigen::Infinity>() < 1e-10);

  // Constrained Stokes slab matrix against a dense LU solve.
  const Discretization small(1, 2, true);
  const StageSystem sys(small, slab_coefficients(gauss_radau(0)), 0.1, 1.0, StabParams(0.1));
  const auto n = static_cast<Eigen::Index>(sys.layout().size());
  const SparseMatrix a = sys.jacobian(Eigen::VectorXd::Zero(n));
  std::mt19937 rng(4);
  const Eigen::VectorXd rhs = random_vector(n, rng);
  const Eigen::VectorXd x = linear_solve(a, rhs);
  const Eigen::VectorXd oracle = Eigen::MatrixXd(a).fullPivLu().solve(rhs);
  CHECK((x - oracle).lpNorm<Eigen::Infinity>() <= 1e-9);

  LinearSolver solver;
  solver.factorize(a);
  CHECK((solver.solve(rhs) - oracle).lpNorm<Eigen::Infinity>() <= 1e-9);
  CHECK(std::string(LinearSolver::backend_name()).size() > 0);

  SparseMatrix singular(3, 3);
  singular.insert(0, 0) = 1.0;
  singular.insert(1, 1) = 1.0;
  singular.makeCompressed();
  CHECK_THROWS_AS(solver.factorize(singular), SolverFailure);
}
