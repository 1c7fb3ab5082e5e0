#include "nsdg/linear_solver.hpp"

#include <cmath>
#include <cstdio>

#ifdef NSDG_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#else
#include <Eigen/SparseLU>
#endif

namespace nsdg {

struct DirectSolver::Impl {
#ifdef NSDG_HAVE_UMFPACK
  Eigen::UmfPackLU<SpMat> lu;
#else
  Eigen::SparseLU<SpMat> lu;
#endif
};

DirectSolver::DirectSolver() : impl_(std::make_unique<Impl>()) {}
DirectSolver::~DirectSolver() = default;
DirectSolver::DirectSolver(DirectSolver&&) noexcept = default;
DirectSolver& DirectSolver::operator=(DirectSolver&&) noexcept = default;

void DirectSolver::analyze(const SpMat& pattern) { impl_->lu.analyzePattern(pattern); }

bool DirectSolver::factorize(const SpMat& mat) {
  impl_->lu.factorize(mat);
  return impl_->lu.info() == Eigen::Success;
}

VecX DirectSolver::solve(const VecX& b) const { return impl_->lu.solve(b); }

void RefinedSolver::analyze(const SpMat& pattern) {
  direct_.analyze(pattern);
  analyzed_ = true;
  have_numeric_ = false;
}

VecX RefinedSolver::solve(const SpMat& current, const VecX& b, double tol, bool fresh_factor) {
  const double bnorm = b.norm();
  if (bnorm == 0.0) return VecX::Zero(b.size());
  if (!analyzed_) analyze(current);

  // normwise relative backward error ||r|| / (||A||_F ||x|| + ||b||)
  const double anorm =
      Eigen::Map<const VecX>(current.valuePtr(), current.nonZeros()).norm();

  auto refactor = [&]() {
    if (!direct_.factorize(current))
      throw SolverError("linear solver: numerically singular slab system");
    ++factorizations_;
    have_numeric_ = true;
  };
  if (fresh_factor || !have_numeric_) refactor();

  VecX x = direct_.solve(b);
  bool refactored = fresh_factor;
  double prev_rel = std::numeric_limits<double>::infinity();
  double best_rel = prev_rel;
  int stagnant = 0;
  for (int sweep = 0; sweep < 80; ++sweep) {
    const VecX r = b - current * x;
    const double rel = r.norm() / (anorm * x.norm() + bnorm);
    best_rel = std::min(best_rel, rel);
    if (rel <= tol) return x;
    if (rel >= 0.5 * prev_rel) {
      if (!refactored) {
        refactor();
        refactored = true;
        x = direct_.solve(b);
        prev_rel = std::numeric_limits<double>::infinity();
        continue;
      }
      if (++stagnant >= 5) break;
    } else {
      stagnant = 0;
    }
    prev_rel = rel;
    x += direct_.solve(r);
  }
  char msg[96];
  std::snprintf(msg, sizeof(msg), "linear solver: backward error stagnated at %.3e",
                best_rel);
  throw SolverError(msg);
}

VecX linear_solve(const SpMat& matrix, const VecX& rhs, double tol) {
  if (matrix.rows() != matrix.cols() || matrix.rows() != rhs.size())
    throw std::invalid_argument("linear_solve: dimension mismatch");
  RefinedSolver solver;
  return solver.solve(matrix, rhs, tol, true);
}

} // namespace nsdg
