#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lpsdg/assembly.hpp"
#include "lpsdg/fields.hpp"
#include "lpsdg/linear_solver.hpp"
#include "lpsdg/lps.hpp"
#include "lpsdg/temporal_rules.hpp"

namespace lpsdg {

struct NewtonConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  int max_iter = 20;
  /// Keep the last factorized Jacobian (across iterations and slabs) while
  /// each step reduces the residual by at least `refresh_ratio`.
  bool reuse_jacobian = true;
  double refresh_ratio = 0.1;

  /// Throws std::invalid_argument unless tolerances > 0, max_iter >= 1 and
  /// refresh_ratio lies in (0, 1).
  void validate() const;
};

/// Closed-form data of one run.
struct ProblemData {
  double nu = 1.0;
  double mu = 0.0;
  VectorField forcing;
  VectorField boundary;  // Dirichlet data g(t, x)
  VectorField initial;   // u_0, evaluated at t = 0
};

/// Newton did not converge on a slab.
class StepFailure : public std::runtime_error {
 public:
  StepFailure(std::size_t slab, double residual, const std::string& what)
      : std::runtime_error(what), slab_(slab), residual_(residual) {}
  std::size_t slab() const { return slab_; }
  double residual() const { return residual_; }

 private:
  std::size_t slab_;
  double residual_;
};

struct SlabState {
  std::size_t n = 0;
  std::vector<double> times;  // t_{n,1..k+1}
  std::vector<FieldCoefficients> velocity;
  std::vector<FieldCoefficients> pressure;
  std::vector<double> residual_history;  // Euclidean residual norm per accepted iterate
  std::size_t factorizations = 0;
};

struct TrajectoryRecord {
  TimePartition partition{std::vector<double>{0.0, 1.0}};
  RadauRule rule;
  FieldCoefficients initial;
  std::vector<SlabState> slabs;

  /// u(t_n^-): n = 0 gives the initial coefficients, otherwise the last stage of slab n.
  const FieldCoefficients& left_limit(std::size_t n) const {
    return n == 0 ? initial : slabs[n - 1].velocity.back();
  }
  /// u(t_{n-1}^+) of slab n, the dG polynomial at the left end of the slab.
  FieldCoefficients right_limit(std::size_t n) const;
  /// dG velocity (or pressure) on slab n at reference time t_hat in [-1, 1].
  FieldCoefficients velocity_at(std::size_t n, double t_hat) const;
  FieldCoefficients pressure_at(std::size_t n, double t_hat) const;
};

/// Nodal interpolant of u_0 (bubble part by cellwise L2 fit).
FieldCoefficients initial_velocity(const VectorField& u0, const VelocitySpace& space);

/// Advances the dG(k) scheme slab by slab, solving the coupled stage system
/// of each slab by Newton's method with the analytic Jacobian.
class SlabSolver {
 public:
  SlabSolver(const Discretization& disc, int k, ProblemData data, NewtonConfig config = {});
  ~SlabSolver();

  const RadauRule& rule() const { return rule_; }
  const SlabCoefficients& coefficients() const { return coeffs_; }
  const Discretization& discretization() const { return disc_; }
  const ProblemData& data() const { return data_; }
  const NewtonConfig& config() const { return config_; }

  /// Throws StepFailure (carrying `n`) when Newton fails, SolverFailure when
  /// a factorization breaks down.
  SlabState solve_slab(const FieldCoefficients& u0, double t_prev, double tau, std::size_t n = 1);

  /// Solves all slabs of the partition. Any failure, including a singular
  /// factorization, is reported as StepFailure with the slab index.
  TrajectoryRecord advance(const TimePartition& partition);

  /// The slab system for a given tau (built on first use, then cached).
  const StageSystem& system(double tau) { return system_for(tau); }

 private:
  StageSystem& system_for(double tau);

  const Discretization& disc_;
  RadauRule rule_;
  SlabCoefficients coeffs_;
  ProblemData data_;
  NewtonConfig config_;
  StabParams stab_;
  std::vector<std::pair<double, std::unique_ptr<StageSystem>>> systems_;
  LinearSolver solver_;
  const StageSystem* factorized_for_ = nullptr;
  // Last solved slab, used to extrapolate the initial Newton iterate.
  struct PreviousSlab {
    double start = 0.0;
    double tau = 0.0;
    std::vector<FieldCoefficients> velocity;
    std::vector<FieldCoefficients> pressure;
  };
  std::optional<PreviousSlab> previous_;
};

/// Continuous, piecewise degree-(k+1) reconstruction: on slab n the
/// interpolant through (t_{n-1}, u(t_{n-1}^-)) and the stage values.
class PostprocessedTrajectory {
 public:
  explicit PostprocessedTrajectory(const TrajectoryRecord& trajectory);

  /// Value at any t in [0, T].
  FieldCoefficients evaluate(double t) const;
  /// Value on slab n at reference time t_hat in [-1, 1].
  FieldCoefficients evaluate_on_slab(std::size_t n, double t_hat) const;

 private:
  const TrajectoryRecord& trajectory_;
  LagrangeBasis1D basis_;
};

PostprocessedTrajectory postprocess(const TrajectoryRecord& trajectory);

}  // namespace lpsdg
