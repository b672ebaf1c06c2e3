#include "lpsdg/slab_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace lpsdg {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

FieldCoefficients combine(const std::vector<FieldCoefficients>& values,
                          const Eigen::VectorXd& weights) {
  FieldCoefficients out = weights[0] * values[0];
  for (std::size_t j = 1; j < values.size(); ++j) {
    out += weights[idx(j)] * values[j];
  }
  return out;
}

}  // namespace

void NewtonConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0) || max_iter < 1 || !(refresh_ratio > 0.0) ||
      !(refresh_ratio < 1.0)) {
    throw std::invalid_argument(
        "NewtonConfig: tolerances must be positive, max_iter >= 1, refresh_ratio in (0, 1)");
  }
}

FieldCoefficients TrajectoryRecord::right_limit(std::size_t n) const {
  return velocity_at(n, -1.0);
}

FieldCoefficients TrajectoryRecord::velocity_at(std::size_t n, double t_hat) const {
  const LagrangeBasis1D basis(rule.points);
  return combine(slabs[n - 1].velocity, basis.values(t_hat));
}

FieldCoefficients TrajectoryRecord::pressure_at(std::size_t n, double t_hat) const {
  const LagrangeBasis1D basis(rule.points);
  return combine(slabs[n - 1].pressure, basis.values(t_hat));
}

FieldCoefficients initial_velocity(const VectorField& u0, const VelocitySpace& space) {
  return interpolate(space, [&](const Point2& x) { return u0(0.0, x); });
}

SlabSolver::SlabSolver(const Discretization& disc, int k, ProblemData data, NewtonConfig config)
    : disc_(disc),
      rule_(gauss_radau(k)),
      coeffs_(slab_coefficients(rule_)),
      data_(std::move(data)),
      config_(config),
      stab_(data_.mu) {
  config_.validate();
  if (!data_.forcing || !data_.boundary || !data_.initial) {
    throw std::invalid_argument("SlabSolver: forcing, boundary and initial data are required");
  }
}

SlabSolver::~SlabSolver() = default;

StageSystem& SlabSolver::system_for(double tau) {
  // Uniform partitions produce slab lengths that differ in the last bits.
  for (const auto& [cached_tau, sys] : systems_) {
    if (std::abs(cached_tau - tau) <= 1e-12 * tau) {
      return *sys;
    }
  }
  systems_.emplace_back(tau, std::make_unique<StageSystem>(disc_, coeffs_, tau, data_.nu, stab_));
  return *systems_.back().second;
}

SlabState SlabSolver::solve_slab(const FieldCoefficients& u0, double t_prev, double tau,
                                 std::size_t n) {
  if (!(tau > 0.0)) {
    throw std::invalid_argument("solve_slab: tau must be positive");
  }
  if (!u0.allFinite() || static_cast<std::size_t>(u0.size()) != disc_.velocity().dim()) {
    throw std::invalid_argument("solve_slab: initial coefficients must be finite and sized");
  }
  StageSystem& sys = system_for(tau);
  const StageLayout& layout = sys.layout();
  const SlabQuadrature q = map_to_slab(rule_, t_prev, sys.tau());

  std::vector<std::vector<std::pair<std::size_t, double>>> bc;
  std::vector<FieldCoefficients> loads;
  for (const double t : q.points) {
    bc.push_back(dirichlet_values(disc_.velocity(), data_.boundary, t));
    loads.push_back(assemble_load(disc_, data_.forcing, t));
  }
  sys.apply_constraints(bc);

  // Initial iterate: the previous slab's polynomial continued into this slab
  // when the slabs are adjacent, otherwise u0 in every stage.
  Eigen::VectorXd x = Eigen::VectorXd::Zero(idx(layout.size()));
  const bool adjacent =
      previous_ && std::abs(previous_->start + previous_->tau - t_prev) <= 1e-12 * tau &&
      (previous_->velocity.back() - u0).lpNorm<Eigen::Infinity>() == 0.0;
  if (adjacent) {
    const LagrangeBasis1D basis(rule_.points);
    for (std::size_t i = 0; i < layout.stages; ++i) {
      const double t_hat = 2.0 * (q.points[i] - previous_->start) / previous_->tau - 1.0;
      const Eigen::VectorXd phi = basis.values(t_hat);
      x.segment(idx(layout.velocity_offset(i)), idx(layout.velocity)) =
          combine(previous_->velocity, phi);
      x.segment(idx(layout.pressure_offset(i)), idx(layout.pressure)) =
          combine(previous_->pressure, phi);
    }
  } else {
    for (std::size_t i = 0; i < layout.stages; ++i) {
      x.segment(idx(layout.velocity_offset(i)), idx(layout.velocity)) = u0;
    }
  }
  sys.impose_boundary_values(x);

  SlabState state;
  state.n = n;
  state.times = q.points;

  Eigen::VectorXd res = sys.residual(x, u0, loads);
  double norm = res.norm();
  state.residual_history.push_back(norm);
  const double target = std::max(config_.rel_tol * norm, config_.abs_tol);
  bool converged = norm <= target;
  bool have_factor = config_.reuse_jacobian && factorized_for_ == &sys;
  for (int iter = 0; iter < config_.max_iter && !converged; ++iter) {
    const bool fresh = !have_factor;
    if (fresh) {
      factorized_for_ = nullptr;
      solver_.factorize(sys.jacobian(x));
      factorized_for_ = &sys;
      have_factor = true;
      ++state.factorizations;
    }
    const Eigen::VectorXd delta = solver_.solve(-res);
    const Eigen::VectorXd trial = x + delta;
    Eigen::VectorXd trial_res = sys.residual(trial, u0, loads);
    const double trial_norm = trial_res.norm();
    if (!fresh && !(trial_norm <= config_.refresh_ratio * norm)) {
      // Stale Jacobian: refactor at the better of the two iterates.
      have_factor = false;
      if (!(trial_norm < norm)) {
        continue;
      }
    }
    x = trial;
    res = std::move(trial_res);
    norm = trial_norm;
    state.residual_history.push_back(norm);
    if (!std::isfinite(norm)) {
      break;
    }
    if (!config_.reuse_jacobian) {
      have_factor = false;
    }
    // An update below rounding level of the iterate cannot reduce the residual further.
    const double roundoff = 8.0 * std::numeric_limits<double>::epsilon() *
                            std::max(1.0, x.lpNorm<Eigen::Infinity>());
    converged = norm <= target || (fresh && delta.lpNorm<Eigen::Infinity>() <= roundoff);
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "Newton did not converge on slab " << n << ": residual " << norm << " after "
        << config_.max_iter << " iterations (target " << target << ")";
    throw StepFailure(n, norm, msg.str());
  }

  for (std::size_t i = 0; i < layout.stages; ++i) {
    state.velocity.push_back(sys.velocity(x, i));
    state.pressure.push_back(sys.pressure(x, i));
  }
  previous_ = PreviousSlab{t_prev, sys.tau(), state.velocity, state.pressure};
  return state;
}

TrajectoryRecord SlabSolver::advance(const TimePartition& partition) {
  TrajectoryRecord record;
  record.partition = partition;
  record.rule = rule_;
  record.initial = initial_velocity(data_.initial, disc_.velocity());
  record.slabs.reserve(partition.num_slabs());
  for (std::size_t n = 1; n <= partition.num_slabs(); ++n) {
    try {
      record.slabs.push_back(
          solve_slab(record.left_limit(n - 1), partition.start(n), partition.tau(n), n));
    } catch (const SolverFailure& e) {
      throw StepFailure(n, std::numeric_limits<double>::quiet_NaN(),
                        "linear solve failed on slab " + std::to_string(n) + ": " + e.what());
    }
  }
  return record;
}

namespace {

std::vector<double> postprocess_nodes(const RadauRule& rule) {
  std::vector<double> nodes{-1.0};
  nodes.insert(nodes.end(), rule.points.begin(), rule.points.end());
  return nodes;
}

}  // namespace

PostprocessedTrajectory::PostprocessedTrajectory(const TrajectoryRecord& trajectory)
    : trajectory_(trajectory), basis_(postprocess_nodes(trajectory.rule)) {}

FieldCoefficients PostprocessedTrajectory::evaluate_on_slab(std::size_t n, double t_hat) const {
  const Eigen::VectorXd w = basis_.values(t_hat);
  FieldCoefficients out = w[0] * trajectory_.left_limit(n - 1);
  const SlabState& slab = trajectory_.slabs[n - 1];
  for (std::size_t j = 0; j < slab.velocity.size(); ++j) {
    out += w[idx(j + 1)] * slab.velocity[j];
  }
  return out;
}

FieldCoefficients PostprocessedTrajectory::evaluate(double t) const {
  const TimePartition& p = trajectory_.partition;
  const auto nodes = p.nodes();
  if (t <= nodes.front()) {
    return trajectory_.initial;
  }
  // slab n covers (t_{n-1}, t_n]
  auto it = std::lower_bound(nodes.begin(), nodes.end(), t);
  if (it == nodes.end()) {
    it = nodes.end() - 1;
  }
  const auto n = static_cast<std::size_t>(it - nodes.begin());
  const double t_hat = 2.0 * (t - p.start(n)) / p.tau(n) - 1.0;
  return evaluate_on_slab(n, std::clamp(t_hat, -1.0, 1.0));
}

PostprocessedTrajectory postprocess(const TrajectoryRecord& trajectory) {
  return PostprocessedTrajectory(trajectory);
}

}  // namespace lpsdg
