#pragma once

#include <memory>
#include <stdexcept>

#include "nsdg/types.hpp"

namespace nsdg {

struct SolverError : std::runtime_error {
  explicit SolverError(const std::string& msg, int slab_index = -1)
      : std::runtime_error(msg), slab(slab_index) {}
  int slab;
};

struct FixedPointError : SolverError {
  FixedPointError(const std::string& msg, int slab_index, double res)
      : SolverError(msg, slab_index), residual(res) {}
  double residual;
};

// Sparse direct factorization (UMFPACK when available, Eigen::SparseLU
// otherwise) with separate symbolic/numeric phases.
class DirectSolver {
public:
  DirectSolver();
  ~DirectSolver();
  DirectSolver(DirectSolver&&) noexcept;
  DirectSolver& operator=(DirectSolver&&) noexcept;

  void analyze(const SpMat& pattern);
  bool factorize(const SpMat& mat); // false on numerical singularity
  VecX solve(const VecX& b) const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Drives the relative residual of current * x = b below tol by residual
// correction. The numeric factors of a previous (nearby) matrix may be
// reused as the corrector; the solver refactorizes automatically when the
// correction stalls. Throws SolverError on breakdown.
class RefinedSolver {
public:
  void analyze(const SpMat& pattern);
  VecX solve(const SpMat& current, const VecX& b, double tol, bool fresh_factor);
  int num_factorizations() const { return factorizations_; }

private:
  DirectSolver direct_;
  bool analyzed_ = false;
  bool have_numeric_ = false;
  int factorizations_ = 0;
};

// One-shot residual-checked solve of a general sparse square system.
VecX linear_solve(const SpMat& matrix, const VecX& rhs, double tol = 1e-12);

} // namespace nsdg
