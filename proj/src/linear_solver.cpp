#include "lpsdg/linear_solver.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include <Eigen/SparseLU>
#ifdef LPSDG_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif

namespace lpsdg {

namespace {

#ifdef LPSDG_HAVE_UMFPACK
using Backend = Eigen::UmfPackLU<SparseMatrix>;
#else
using Backend = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;
#endif

// SparseLU names the failing column in its error text; used for diagnostics
// whichever backend did the factorization.
long locate_zero_pivot(const SparseMatrix& matrix) {
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(matrix);
  if (lu.info() == Eigen::Success) {
    return -1;
  }
  const std::string msg = lu.lastErrorMessage();
  const auto pos = msg.rfind("AT ");
  if (pos == std::string::npos) {
    return -1;
  }
  try {
    return std::stol(msg.substr(pos + 3));
  } catch (const std::exception&) {
    return -1;
  }
}

}  // namespace

struct LinearSolver::Impl {
  Impl() {
#ifdef LPSDG_HAVE_UMFPACK
    // Refinement is done (and checked) in solve(); the saddle-point blocks
    // order better on A + A^T.
    lu.umfpackControl()(UMFPACK_IRSTEP) = 0;
    lu.umfpackControl()(UMFPACK_STRATEGY) = UMFPACK_STRATEGY_SYMMETRIC;
    lu.umfpackControl()(UMFPACK_ORDERING) = UMFPACK_ORDERING_METIS;
#endif
  }

  Backend lu;
  SparseMatrix copy;
  std::vector<int> outer;
  std::vector<int> inner;
  bool analyzed = false;

  bool same_pattern(const SparseMatrix& a) const {
    if (!analyzed || static_cast<std::size_t>(a.nonZeros()) != inner.size() ||
        static_cast<std::size_t>(a.outerSize() + 1) != outer.size()) {
      return false;
    }
    return std::equal(outer.begin(), outer.end(), a.outerIndexPtr()) &&
           std::equal(inner.begin(), inner.end(), a.innerIndexPtr());
  }
};

LinearSolver::LinearSolver() : impl_(std::make_unique<Impl>()) {}
LinearSolver::~LinearSolver() = default;
LinearSolver::LinearSolver(LinearSolver&&) noexcept = default;
LinearSolver& LinearSolver::operator=(LinearSolver&&) noexcept = default;

void LinearSolver::factorize(const SparseMatrix& matrix) {
  if (matrix.rows() != matrix.cols()) {
    throw SolverFailure("linear solve: matrix is not square", -1);
  }
  Impl& s = *impl_;
  // The backend keeps referring to the factorized matrix during solves.
  s.copy = matrix;
  s.copy.makeCompressed();
  const SparseMatrix& a = s.copy;
  if (!s.same_pattern(a)) {
    s.lu.analyzePattern(a);
    s.outer.assign(a.outerIndexPtr(), a.outerIndexPtr() + a.outerSize() + 1);
    s.inner.assign(a.innerIndexPtr(), a.innerIndexPtr() + a.nonZeros());
    s.analyzed = true;
  }
  s.lu.factorize(a);
  if (s.lu.info() != Eigen::Success) {
    s.analyzed = false;
    const long pivot = locate_zero_pivot(a);
    throw SolverFailure("linear solve: singular factorization" +
                            (pivot >= 0 ? " at column " + std::to_string(pivot) : std::string{}),
                        pivot);
  }
}

Eigen::VectorXd LinearSolver::solve(const Eigen::VectorXd& rhs, int refinement) const {
  const Impl& s = *impl_;
  Eigen::VectorXd x = s.lu.solve(rhs);
  const double target = 1e-10 * (rhs.norm() + 1.0);
  for (int step = 0; step < refinement; ++step) {
    const Eigen::VectorXd r = rhs - s.copy * x;
    if (r.norm() <= target) {
      break;
    }
    x += s.lu.solve(r);
  }
  if (!x.allFinite()) {
    throw SolverFailure("linear solve: non-finite solution", -1);
  }
  return x;
}

const char* LinearSolver::backend_name() {
#ifdef LPSDG_HAVE_UMFPACK
  return "umfpack";
#else
  return "eigen-sparselu";
#endif
}

Eigen::VectorXd linear_solve(const SparseMatrix& matrix, const Eigen::VectorXd& rhs) {
  LinearSolver solver;
  solver.factorize(matrix);
  return solver.solve(rhs);
}

}  // namespace lpsdg
