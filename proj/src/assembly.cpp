#include "lpsdg/assembly.hpp"

#include <algorithm>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace lpsdg {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

// Local 2nv x 2nv convection matrices with interleaved (a, c) -> 2a + c rows.
struct ConvectionLocal {
  Eigen::MatrixXd skew;      // scalar T, nv x nv
  Eigen::MatrixXd jacobian;  // 2nv x 2nv, only filled on request
};

ConvectionLocal convection_local(const Discretization& disc, const FieldCoefficients& u,
                                 std::size_t cell, bool with_jacobian) {
  const ElementTable& tab = disc.velocity_table();
  const Eigen::MatrixXd& phi = tab.values;
  const Eigen::MatrixXd& gx = disc.grad_x();
  const Eigen::MatrixXd& gy = disc.grad_y();
  const Eigen::VectorXd& w = disc.weights();
  const CellFieldValues f = disc.evaluate_velocity(u, cell);
  const Eigen::Index nv = phi.cols();

  // G(q, b) = u(q) . grad phi_b(q)
  const Eigen::MatrixXd adv = f.values.col(0).asDiagonal() * gx + f.values.col(1).asDiagonal() * gy;
  const Eigen::MatrixXd x = phi.transpose() * w.asDiagonal() * adv;

  ConvectionLocal out;
  out.skew.resize(nv, nv);
  for (Eigen::Index a = 0; a < nv; ++a) {
    out.skew(a, a) = 0.0;
    for (Eigen::Index b = a + 1; b < nv; ++b) {
      const double t = 0.5 * (x(a, b) - x(b, a));
      out.skew(a, b) = t;
      out.skew(b, a) = -t;
    }
  }
  if (!with_jacobian) {
    return out;
  }

  out.jacobian = Eigen::MatrixXd::Zero(2 * nv, 2 * nv);
  const Eigen::MatrixXd* grads[2] = {&gx, &gy};
  // d_{c'} u_c at the quadrature points
  const Eigen::MatrixX2d* du[2] = {&f.dx, &f.dy};
  for (int c = 0; c < 2; ++c) {
    for (int cp = 0; cp < 2; ++cp) {
      const Eigen::VectorXd wd = w.cwiseProduct(du[cp]->col(c));
      const Eigen::MatrixXd p = phi.transpose() * wd.asDiagonal() * phi;
      const Eigen::VectorXd wu = w.cwiseProduct(f.values.col(c));
      const Eigen::MatrixXd q = grads[cp]->transpose() * wu.asDiagonal() * phi;
      for (Eigen::Index a = 0; a < nv; ++a) {
        for (Eigen::Index b = 0; b < nv; ++b) {
          double v = 0.5 * (p(a, b) - q(a, b));
          if (c == cp) {
            v += out.skew(a, b);
          }
          out.jacobian(2 * a + c, 2 * b + cp) = v;
        }
      }
    }
  }
  return out;
}

std::vector<ConvectionLocal> convection_locals(const Discretization& disc,
                                               const FieldCoefficients& u, bool with_jacobian) {
  std::vector<ConvectionLocal> locals(disc.mesh().num_cells());
  disc.for_each_cell([&](std::size_t cell) {
    locals[cell] = convection_local(disc, u, cell, with_jacobian);
  });
  return locals;
}

}  // namespace

Discretization::Discretization(int level, int r, bool enriched, unsigned threads)
    : mesh_(std::make_shared<const Mesh>(build_uniform_mesh(level))),
      spaces_(build_spaces(mesh_, r, enriched)),
      threads_(std::max(1u, threads)),
      rule_(spatial_quadrature(r)),
      velocity_table_(tabulate(spaces_.velocity.element(), rule_)),
      pressure_table_(tabulate(spaces_.pressure.element(), rule_)) {
  const double inv_scale = 1.0 / mesh_->jacobian_scale();
  grad_x_ = inv_scale * velocity_table_.dx;
  grad_y_ = inv_scale * velocity_table_.dy;
  weights_.resize(idx(rule_.size()));
  for (std::size_t q = 0; q < rule_.size(); ++q) {
    weights_[idx(q)] = rule_.weights[q] * mesh_->jacobian_det();
  }
  points_.reserve(mesh_->num_cells() * rule_.size());
  for (const Cell& cell : mesh_->cells()) {
    for (const Point2& xhat : rule_.points) {
      points_.push_back(mesh_->reference_map(cell, xhat).x);
    }
  }
  projector_ = std::make_unique<LocalProjector>(*mesh_, mesh_->cells().front(),
                                                spaces_.velocity.element(), rule_);
}

Eigen::MatrixX2d Discretization::gather(const FieldCoefficients& u, std::size_t cell) const {
  const auto dofs = velocity().cell_dofs(cell);
  Eigen::MatrixX2d local(idx(dofs.size()), 2);
  for (std::size_t a = 0; a < dofs.size(); ++a) {
    local(idx(a), 0) = u[idx(2 * dofs[a])];
    local(idx(a), 1) = u[idx(2 * dofs[a] + 1)];
  }
  return local;
}

CellFieldValues Discretization::evaluate_velocity(const FieldCoefficients& u,
                                                  std::size_t cell) const {
  const Eigen::MatrixX2d local = gather(u, cell);
  return {velocity_table_.values * local, grad_x_ * local, grad_y_ * local};
}

Eigen::VectorXd Discretization::evaluate_pressure(const FieldCoefficients& p,
                                                  std::size_t cell) const {
  const auto nd = idx(pressure().element().local_dim());
  return pressure_table_.values * p.segment(idx(pressure().cell_offset(cell)), nd);
}

void Discretization::for_each_cell(const std::function<void(std::size_t)>& fn) const {
  const std::size_t n = mesh_->num_cells();
  const std::size_t workers = std::min<std::size_t>(threads_, n);
  if (workers <= 1) {
    for (std::size_t c = 0; c < n; ++c) {
      fn(c);
    }
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = n * w / workers;
    const std::size_t end = n * (w + 1) / workers;
    pool.emplace_back([&, begin, end] {
      try {
        for (std::size_t c = begin; c < end; ++c) {
          fn(c);
        }
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) {
          error = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) {
    t.join();
  }
  if (error) {
    std::rethrow_exception(error);
  }
}

SparseMatrix assemble_mass(const Discretization& disc) {
  const Eigen::MatrixXd& phi = disc.velocity_table().values;
  const Eigen::MatrixXd local = phi.transpose() * disc.weights().asDiagonal() * phi;
  return assemble_componentwise(disc.velocity(), 0.5 * (local + local.transpose()));
}

StokesBlocks assemble_stokes(const Discretization& disc, double nu) {
  const Eigen::VectorXd& w = disc.weights();
  const Eigen::MatrixXd& gx = disc.grad_x();
  const Eigen::MatrixXd& gy = disc.grad_y();
  const Eigen::MatrixXd stiff =
      gx.transpose() * w.asDiagonal() * gx + gy.transpose() * w.asDiagonal() * gy;

  StokesBlocks blocks;
  blocks.viscous = assemble_componentwise(disc.velocity(), nu * 0.5 * (stiff + stiff.transpose()));

  const Eigen::MatrixXd& psi = disc.pressure_table().values;
  const Eigen::MatrixXd div_x = psi.transpose() * w.asDiagonal() * gx;
  const Eigen::MatrixXd div_y = psi.transpose() * w.asDiagonal() * gy;
  const auto np = static_cast<std::size_t>(psi.cols());
  const auto nv = static_cast<std::size_t>(gx.cols());
  std::vector<Triplet> triplets;
  triplets.reserve(disc.mesh().num_cells() * np * nv * 2);
  for (std::size_t cell = 0; cell < disc.mesh().num_cells(); ++cell) {
    const auto dofs = disc.velocity().cell_dofs(cell);
    const std::size_t p0 = disc.pressure().cell_offset(cell);
    for (std::size_t m = 0; m < np; ++m) {
      for (std::size_t a = 0; a < nv; ++a) {
        triplets.emplace_back(static_cast<int>(p0 + m), static_cast<int>(2 * dofs[a]),
                              div_x(idx(m), idx(a)));
        triplets.emplace_back(static_cast<int>(p0 + m), static_cast<int>(2 * dofs[a] + 1),
                              div_y(idx(m), idx(a)));
      }
    }
  }
  blocks.divergence.resize(idx(disc.pressure().dim()), idx(disc.velocity().dim()));
  blocks.divergence.setFromTriplets(triplets.begin(), triplets.end());
  return blocks;
}

SparseMatrix assemble_convection(const Discretization& disc, const FieldCoefficients& u) {
  const std::vector<ConvectionLocal> locals = convection_locals(disc, u, false);
  SparseMatrix n_mat(idx(disc.velocity().dim()), idx(disc.velocity().dim()));
  std::vector<Triplet> triplets;
  for (std::size_t cell = 0; cell < locals.size(); ++cell) {
    const auto dofs = disc.velocity().cell_dofs(cell);
    const Eigen::MatrixXd& t = locals[cell].skew;
    for (std::size_t a = 0; a < dofs.size(); ++a) {
      for (std::size_t b = 0; b < dofs.size(); ++b) {
        for (int c = 0; c < 2; ++c) {
          triplets.emplace_back(static_cast<int>(2 * dofs[a] + c),
                                static_cast<int>(2 * dofs[b] + c), t(idx(a), idx(b)));
        }
      }
    }
  }
  n_mat.setFromTriplets(triplets.begin(), triplets.end());
  return n_mat;
}

FieldCoefficients convection_residual(const Discretization& disc, const FieldCoefficients& u) {
  const std::vector<ConvectionLocal> locals = convection_locals(disc, u, false);
  FieldCoefficients out = FieldCoefficients::Zero(idx(disc.velocity().dim()));
  for (std::size_t cell = 0; cell < locals.size(); ++cell) {
    const auto dofs = disc.velocity().cell_dofs(cell);
    const Eigen::MatrixX2d contrib = locals[cell].skew * disc.gather(u, cell);
    for (std::size_t a = 0; a < dofs.size(); ++a) {
      out[idx(2 * dofs[a])] += contrib(idx(a), 0);
      out[idx(2 * dofs[a] + 1)] += contrib(idx(a), 1);
    }
  }
  return out;
}

SparseMatrix convection_jacobian(const Discretization& disc, const FieldCoefficients& u) {
  const std::vector<ConvectionLocal> locals = convection_locals(disc, u, true);
  std::vector<Triplet> triplets;
  for (std::size_t cell = 0; cell < locals.size(); ++cell) {
    const auto dofs = disc.velocity().cell_dofs(cell);
    const Eigen::MatrixXd& j = locals[cell].jacobian;
    for (std::size_t a = 0; a < dofs.size(); ++a) {
      for (int c = 0; c < 2; ++c) {
        for (std::size_t b = 0; b < dofs.size(); ++b) {
          for (int cp = 0; cp < 2; ++cp) {
            triplets.emplace_back(static_cast<int>(2 * dofs[a] + c),
                                  static_cast<int>(2 * dofs[b] + cp),
                                  j(idx(2 * a + c), idx(2 * b + cp)));
          }
        }
      }
    }
  }
  SparseMatrix jac(idx(disc.velocity().dim()), idx(disc.velocity().dim()));
  jac.setFromTriplets(triplets.begin(), triplets.end());
  return jac;
}

FieldCoefficients assemble_load(const Discretization& disc, const VectorField& f, double t) {
  const Eigen::MatrixXd& phi = disc.velocity_table().values;
  const Eigen::VectorXd& w = disc.weights();
  const auto nq = phi.rows();
  std::vector<Eigen::MatrixX2d> locals(disc.mesh().num_cells());
  disc.for_each_cell([&](std::size_t cell) {
    const auto pts = disc.points(cell);
    Eigen::MatrixX2d fw(nq, 2);
    for (Eigen::Index q = 0; q < nq; ++q) {
      const Vec2 value = f(t, pts[static_cast<std::size_t>(q)]);
      fw(q, 0) = w[q] * value.x();
      fw(q, 1) = w[q] * value.y();
    }
    locals[cell] = phi.transpose() * fw;
  });
  FieldCoefficients out = FieldCoefficients::Zero(idx(disc.velocity().dim()));
  for (std::size_t cell = 0; cell < locals.size(); ++cell) {
    const auto dofs = disc.velocity().cell_dofs(cell);
    for (std::size_t a = 0; a < dofs.size(); ++a) {
      out[idx(2 * dofs[a])] += locals[cell](idx(a), 0);
      out[idx(2 * dofs[a] + 1)] += locals[cell](idx(a), 1);
    }
  }
  return out;
}

Eigen::VectorXd pressure_mean_weights(const Discretization& disc) {
  const Eigen::VectorXd local = disc.pressure_table().values.transpose() * disc.weights();
  const auto nd = local.size();
  Eigen::VectorXd g(idx(disc.pressure().dim()));
  for (std::size_t cell = 0; cell < disc.mesh().num_cells(); ++cell) {
    g.segment(idx(disc.pressure().cell_offset(cell)), nd) = local;
  }
  return g;
}

StageSystem::StageSystem(const Discretization& disc, const SlabCoefficients& coeffs, double tau,
                         double nu, const StabParams& stab)
    : disc_(disc), coeffs_(coeffs), tau_(tau) {
  if (!(tau > 0.0)) {
    throw std::invalid_argument("StageSystem: tau must be positive");
  }
  layout_.stages = static_cast<std::size_t>(coeffs.beta.size());
  layout_.velocity = disc.velocity().dim();
  layout_.pressure = disc.pressure().dim();

  mass_ = assemble_mass(disc);
  StokesBlocks stokes = assemble_stokes(disc, nu);
  viscous_stab_ = stokes.viscous + assemble_Sh(disc.velocity(), disc.projector(), stab);
  divergence_ = std::move(stokes.divergence);
  mean_weights_ = pressure_mean_weights(disc);

  for (const std::size_t s : disc.velocity().boundary_dofs()) {
    constrained_.push_back(2 * s);
    constrained_.push_back(2 * s + 1);
  }
  is_constrained_.assign(layout_.velocity, 0);
  for (const std::size_t d : constrained_) {
    is_constrained_[d] = 1;
  }
  bc_values_.assign(layout_.stages, Eigen::VectorXd::Zero(idx(constrained_.size())));

  const double half_tau = 0.5 * tau_;
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(layout_.stages * layout_.stages * mass_.nonZeros() +
                                            layout_.stages * (viscous_stab_.nonZeros() +
                                                              2 * divergence_.nonZeros())));
  for (std::size_t i = 0; i < layout_.stages; ++i) {
    const auto vi = static_cast<int>(layout_.velocity_offset(i));
    const auto pi = static_cast<int>(layout_.pressure_offset(i));
    const auto gi = static_cast<int>(layout_.gauge_index(i));
    for (std::size_t j = 0; j < layout_.stages; ++j) {
      const auto vj = static_cast<int>(layout_.velocity_offset(j));
      const double a = coeffs_.alpha(idx(i), idx(j));
      for (int col = 0; col < mass_.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(mass_, col); it; ++it) {
          if (!is_constrained_[static_cast<std::size_t>(it.row())]) {
            triplets.emplace_back(vi + it.row(), vj + col, a * it.value());
          }
        }
      }
    }
    for (int col = 0; col < viscous_stab_.outerSize(); ++col) {
      for (SparseMatrix::InnerIterator it(viscous_stab_, col); it; ++it) {
        if (!is_constrained_[static_cast<std::size_t>(it.row())]) {
          triplets.emplace_back(vi + it.row(), vi + col, half_tau * it.value());
        }
      }
    }
    for (int col = 0; col < divergence_.outerSize(); ++col) {
      for (SparseMatrix::InnerIterator it(divergence_, col); it; ++it) {
        triplets.emplace_back(pi + it.row(), vi + col, it.value());
        if (!is_constrained_[static_cast<std::size_t>(col)]) {
          triplets.emplace_back(vi + col, pi + it.row(), -half_tau * it.value());
        }
      }
    }
    for (Eigen::Index m = 0; m < mean_weights_.size(); ++m) {
      triplets.emplace_back(pi + static_cast<int>(m), gi, mean_weights_[m]);
      triplets.emplace_back(gi, pi + static_cast<int>(m), mean_weights_[m]);
    }
    for (const std::size_t d : constrained_) {
      triplets.emplace_back(vi + static_cast<int>(d), vi + static_cast<int>(d), 1.0);
    }
  }
  constant_jacobian_.resize(idx(layout_.size()), idx(layout_.size()));
  constant_jacobian_.setFromTriplets(triplets.begin(), triplets.end());
}

void StageSystem::apply_constraints(
    const std::vector<std::vector<std::pair<std::size_t, double>>>& bc) {
  if (bc.size() != layout_.stages) {
    throw std::invalid_argument("apply_constraints: one boundary value set per stage required");
  }
  for (std::size_t i = 0; i < bc.size(); ++i) {
    if (bc[i].size() != constrained_.size()) {
      throw std::invalid_argument("apply_constraints: wrong number of boundary values");
    }
    for (std::size_t m = 0; m < bc[i].size(); ++m) {
      if (bc[i][m].first != constrained_[m]) {
        throw std::invalid_argument("apply_constraints: boundary dof order mismatch");
      }
      bc_values_[i][idx(m)] = bc[i][m].second;
    }
  }
}

void StageSystem::impose_boundary_values(Eigen::VectorXd& x) const {
  for (std::size_t i = 0; i < layout_.stages; ++i) {
    const std::size_t off = layout_.velocity_offset(i);
    for (std::size_t m = 0; m < constrained_.size(); ++m) {
      x[idx(off + constrained_[m])] = bc_values_[i][idx(m)];
    }
  }
}

FieldCoefficients StageSystem::velocity(const Eigen::VectorXd& x, std::size_t stage) const {
  return x.segment(idx(layout_.velocity_offset(stage)), idx(layout_.velocity));
}

FieldCoefficients StageSystem::pressure(const Eigen::VectorXd& x, std::size_t stage) const {
  return x.segment(idx(layout_.pressure_offset(stage)), idx(layout_.pressure));
}

Eigen::VectorXd StageSystem::residual(const Eigen::VectorXd& x, const FieldCoefficients& u0,
                                      std::span<const FieldCoefficients> loads) const {
  if (loads.size() != layout_.stages) {
    throw std::invalid_argument("StageSystem::residual: one load per stage required");
  }
  const double half_tau = 0.5 * tau_;
  std::vector<Eigen::VectorXd> mu(layout_.stages);
  for (std::size_t j = 0; j < layout_.stages; ++j) {
    mu[j] = mass_ * velocity(x, j);
  }
  const Eigen::VectorXd mu0 = mass_ * u0;

  Eigen::VectorXd res(idx(layout_.size()));
  for (std::size_t i = 0; i < layout_.stages; ++i) {
    const FieldCoefficients ui = velocity(x, i);
    const FieldCoefficients pi = pressure(x, i);
    Eigen::VectorXd rv = -coeffs_.beta[idx(i)] * mu0;
    for (std::size_t j = 0; j < layout_.stages; ++j) {
      rv += coeffs_.alpha(idx(i), idx(j)) * mu[j];
    }
    rv += half_tau * (viscous_stab_ * ui - divergence_.transpose() * pi +
                      convection_residual(disc_, ui) - loads[i]);
    for (std::size_t m = 0; m < constrained_.size(); ++m) {
      const std::size_t d = constrained_[m];
      rv[idx(d)] = ui[idx(d)] - bc_values_[i][idx(m)];
    }
    const double lambda = x[idx(layout_.gauge_index(i))];
    res.segment(idx(layout_.velocity_offset(i)), idx(layout_.velocity)) = rv;
    res.segment(idx(layout_.pressure_offset(i)), idx(layout_.pressure)) =
        divergence_ * ui + lambda * mean_weights_;
    res[idx(layout_.gauge_index(i))] = mean_weights_.dot(pi);
  }
  return res;
}

SparseMatrix StageSystem::jacobian(const Eigen::VectorXd& x) const {
  const double half_tau = 0.5 * tau_;
  std::vector<Triplet> triplets;
  for (std::size_t i = 0; i < layout_.stages; ++i) {
    const auto vi = static_cast<int>(layout_.velocity_offset(i));
    const std::vector<ConvectionLocal> locals = convection_locals(disc_, velocity(x, i), true);
    if (triplets.capacity() == 0) {
      const auto local = static_cast<std::size_t>(locals.front().jacobian.size());
      triplets.reserve(layout_.stages * locals.size() * local);
    }
    for (std::size_t cell = 0; cell < locals.size(); ++cell) {
      const auto dofs = disc_.velocity().cell_dofs(cell);
      const Eigen::MatrixXd& j = locals[cell].jacobian;
      for (std::size_t a = 0; a < dofs.size(); ++a) {
        for (int c = 0; c < 2; ++c) {
          const std::size_t row = 2 * dofs[a] + static_cast<std::size_t>(c);
          if (is_constrained_[row]) {
            continue;
          }
          for (std::size_t b = 0; b < dofs.size(); ++b) {
            for (int cp = 0; cp < 2; ++cp) {
              triplets.emplace_back(vi + static_cast<int>(row),
                                    vi + static_cast<int>(2 * dofs[b] + cp),
                                    half_tau * j(idx(2 * a + c), idx(2 * b + cp)));
            }
          }
        }
      }
    }
  }
  SparseMatrix conv(idx(layout_.size()), idx(layout_.size()));
  conv.setFromTriplets(triplets.begin(), triplets.end());
  SparseMatrix out = constant_jacobian_ + conv;
  out.makeCompressed();
  return out;
}

}  // namespace lpsdg
