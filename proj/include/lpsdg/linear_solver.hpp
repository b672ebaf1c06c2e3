#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace lpsdg {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Triplet = Eigen::Triplet<double, int>;

/// Raised when a factorization breaks down. `pivot` is the offending
/// column when the backend can name it, otherwise -1.
class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(const std::string& what, long pivot)
      : std::runtime_error(what), pivot_(pivot) {}
  long pivot() const { return pivot_; }

 private:
  long pivot_;
};

/// Direct sparse LU. The symbolic analysis is kept between calls as long as
/// the sparsity pattern (dimension and nonzero count) does not change, so
/// repeated Newton solves only refactor numerically.
class LinearSolver {
 public:
  LinearSolver();
  ~LinearSolver();
  LinearSolver(LinearSolver&&) noexcept;
  LinearSolver& operator=(LinearSolver&&) noexcept;

  /// Throws SolverFailure on a singular matrix.
  void factorize(const SparseMatrix& matrix);

  /// Solves with the last factorization, followed by up to `refinement`
  /// steps of iterative refinement while the residual exceeds 1e-10 (|b| + 1).
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs, int refinement = 2) const;

  static const char* backend_name();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// One-shot factorize-and-solve.
Eigen::VectorXd linear_solve(const SparseMatrix& matrix, const Eigen::VectorXd& rhs);

}  // namespace lpsdg
