#include "nsdg/solver.hpp"

#include <cmath>
#include <cstring>

namespace nsdg {

int Trajectory::total_fp_iters() const {
  int total = 0;
  for (int it : fp_iters) total += it;
  return total;
}

VecX Trajectory::velocity_at(const SlabBasis& basis, int n, double t) const {
  return velocity[n - 1].transpose() * basis.lagrange_values(t);
}

MatX transport_nodal(const Trajectory& traj, int n) {
  if (traj.scheme == Scheme::fully_implicit || n == 1) return traj.velocity[n - 1];
  const SlabBasis prev = slab_basis(traj.grid, n - 1);
  const SlabBasis cur = slab_basis(traj.grid, n);
  return tilde_transfer(prev, cur) * traj.velocity[n - 2];
}

namespace {

// Reusable per-run state: frozen slab-matrix pattern with slot lists for
// the static part and the per-node convection blocks, plus the direct
// solver whose symbolic factorization is shared by every slab.
class SlabWorkspace {
public:
  SlabWorkspace(const VelocitySpace& vs, const PressureSpace& ps,
                const SpatialOperators& ops, const TimeGrid& grid, double c_s)
      : vs_(vs), ps_(ps), ops_(ops), grid_(grid) {
    m_ = grid.degree + 1;
    nv_ = vs.dim;
    nq_ = ps.dim;
    size_ = m_ * (nv_ + nq_ + 1);
    for (int i = 0; i < m_; ++i) conv_.emplace_back(vs, c_s);

    constrained_.assign(size_, 0);
    for (int i = 0; i < m_; ++i)
      for (const auto& bd : vs.boundary_dofs) constrained_[u_index(i, bd.global)] = 1;

    build_pattern();
    solver_.analyze(mat_);
  }

  void set_slab(int n, const SlabProblem& problem) {
    basis_ = slab_basis(grid_, n);
    G_ = basis_.weights.asDiagonal() * basis_.deriv;
    G_(0, 0) += 1.0;

    lift_ = VecX::Zero(size_);
    if (problem.dirichlet) {
      for (int i = 0; i < m_; ++i) {
        const double t = basis_.nodes(i);
        const VecX lv = boundary_lift_values(
            vs_, [&](const Vec2& x) { return problem.dirichlet(x, t); });
        for (size_t bi = 0; bi < vs_.boundary_dofs.size(); ++bi)
          lift_(u_index(i, vs_.boundary_dofs[bi].global)) = lv(static_cast<int>(bi));
      }
    }

    rhs_static_ = VecX::Zero(size_);
    std::fill(mat_.valuePtr(), mat_.valuePtr() + mat_.nonZeros(), 0.0);
    size_t cursor = 0;
    walk_static([&](int r, int c, double v) {
      if (constrained_[r]) return;
      if (constrained_[c]) {
        rhs_static_(r) -= v * lift_(c);
        return;
      }
      mat_.valuePtr()[slots_static_[cursor++]] += v;
    });
    for (long s : slots_diag_) mat_.valuePtr()[s] = 1.0;
    static_values_.assign(mat_.valuePtr(), mat_.valuePtr() + mat_.nonZeros());

    for (int i = 0; i < m_; ++i) {
      const double t = basis_.nodes(i);
      const VecX load =
          assemble_load(vs_, [&](const Vec2& x) { return problem.forcing(x, t); });
      rhs_static_.segment(u_index(i, 0), nv_) += basis_.weights(i) * load;
      if (problem.dirichlet) {
        const VecX bip = assemble_boundary_ip_rhs(
            vs_, [&](const Vec2& x) { return problem.dirichlet(x, t); }, ops_.nu,
            ops_.sigma);
        rhs_static_.segment(u_index(i, 0), nv_) += basis_.weights(i) * bip;
      }
    }
    rhs_static_.segment(u_index(0, 0), nv_) += ops_.M * problem.prev_end;
    for (int idx = 0; idx < size_; ++idx)
      if (constrained_[idx]) rhs_static_(idx) = lift_(idx);
  }

  SlabSolution solve(const MatX& w_nodal, double lin_tol, bool fresh) {
    std::memcpy(mat_.valuePtr(), static_values_.data(),
                sizeof(double) * static_values_.size());
    VecX rhs = rhs_static_;
    for (int i = 0; i < m_; ++i) {
      conv_[i].assemble(w_nodal.row(i).transpose());
      const double wi = basis_.weights(i);
      size_t cursor = 0;
      walk_conv_node(i, [&](int r, int c, double v) {
        if (constrained_[r]) return;
        if (constrained_[c]) {
          rhs(r) -= wi * v * lift_(c);
          return;
        }
        mat_.valuePtr()[slots_conv_[i][cursor++]] += wi * v;
      });
    }
    const VecX x = solver_.solve(mat_, rhs, lin_tol, fresh);
    SlabSolution sol;
    sol.u.resize(m_, nv_);
    sol.p.resize(m_, nq_);
    for (int i = 0; i < m_; ++i) {
      sol.u.row(i) = x.segment(u_index(i, 0), nv_).transpose();
      sol.p.row(i) = x.segment(p_index(i, 0), nq_).transpose();
    }
    return sol;
  }

  const SlabBasis& basis() const { return basis_; }
  const ConvectionOperator& convection(int i) const { return conv_[i]; }
  const SpatialOperators& ops() const { return ops_; }

  double mass_norm(const VecX& u) const { return std::sqrt(u.dot(ops_.M * u)); }

  double div_residual(const MatX& u_nodal) const {
    double worst = 0.0;
    for (int i = 0; i < u_nodal.rows(); ++i) {
      const VecX ui = u_nodal.row(i).transpose();
      worst = std::max(worst, (ops_.B * ui).norm() / (1.0 + mass_norm(ui)));
    }
    return worst;
  }

private:
  int u_index(int node, int dof) const { return node * nv_ + dof; }
  int p_index(int node, int dof) const { return m_ * nv_ + node * nq_ + dof; }
  int lambda_index(int node) const { return m_ * (nv_ + nq_) + node; }

  template <class Emit>
  void walk_static(Emit&& emit) {
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < m_; ++j)
        for (int col = 0; col < ops_.M.outerSize(); ++col)
          for (SpMat::InnerIterator it(ops_.M, col); it; ++it)
            emit(u_index(i, static_cast<int>(it.row())), u_index(j, col),
                 G_(i, j) * it.value());
    for (int i = 0; i < m_; ++i) {
      const double wi = basis_.weights(i);
      for (int col = 0; col < ops_.A.outerSize(); ++col)
        for (SpMat::InnerIterator it(ops_.A, col); it; ++it)
          emit(u_index(i, static_cast<int>(it.row())), u_index(i, col),
               ops_.nu * wi * it.value());
      for (int col = 0; col < ops_.B.outerSize(); ++col)
        for (SpMat::InnerIterator it(ops_.B, col); it; ++it) {
          emit(p_index(i, static_cast<int>(it.row())), u_index(i, col), wi * it.value());
          emit(u_index(i, col), p_index(i, static_cast<int>(it.row())), wi * it.value());
        }
      for (int qd = 0; qd < nq_; ++qd) {
        emit(p_index(i, qd), lambda_index(i), wi * ops_.mean(qd));
        emit(lambda_index(i), p_index(i, qd), wi * ops_.mean(qd));
      }
    }
  }

  // per-node convection entries, unweighted (weight applied by the caller)
  template <class Emit>
  void walk_conv_node(int i, Emit&& emit) {
    const SpMat& C = conv_[i].matrix();
    for (int col = 0; col < C.outerSize(); ++col)
      for (SpMat::InnerIterator it(C, col); it; ++it)
        emit(u_index(i, static_cast<int>(it.row())), u_index(i, col), it.value());
  }

  void build_pattern() {
    basis_ = slab_basis(grid_, 1);
    G_ = MatX::Ones(m_, m_); // values are irrelevant for the pattern

    std::vector<Triplet> trip;
    auto add = [&](int r, int c, double) {
      if (constrained_[r] || constrained_[c]) return;
      trip.emplace_back(r, c, 0.0);
    };
    walk_static(add);
    for (int i = 0; i < m_; ++i) walk_conv_node(i, add);
    for (int idx = 0; idx < size_; ++idx)
      if (constrained_[idx]) trip.emplace_back(idx, idx, 0.0);

    mat_.resize(size_, size_);
    mat_.setFromTriplets(trip.begin(), trip.end());
    mat_.makeCompressed();

    double* base = mat_.valuePtr();
    slots_static_.clear();
    walk_static([&](int r, int c, double) {
      if (constrained_[r] || constrained_[c]) return;
      slots_static_.push_back(&mat_.coeffRef(r, c) - base);
    });
    slots_conv_.assign(m_, {});
    for (int i = 0; i < m_; ++i)
      walk_conv_node(i, [&](int r, int c, double) {
        if (constrained_[r] || constrained_[c]) return;
        slots_conv_[i].push_back(&mat_.coeffRef(r, c) - base);
      });
    slots_diag_.clear();
    for (int idx = 0; idx < size_; ++idx)
      if (constrained_[idx]) slots_diag_.push_back(&mat_.coeffRef(idx, idx) - base);
  }

  const VelocitySpace& vs_;
  const PressureSpace& ps_;
  const SpatialOperators& ops_;
  const TimeGrid& grid_;
  int m_ = 1, nv_ = 0, nq_ = 0, size_ = 0;
  std::vector<ConvectionOperator> conv_;
  std::vector<char> constrained_;
  SlabBasis basis_;
  MatX G_;
  SpMat mat_;
  std::vector<long> slots_static_, slots_diag_;
  std::vector<std::vector<long>> slots_conv_;
  std::vector<double> static_values_;
  VecX rhs_static_, lift_;
  RefinedSolver solver_;
};

Trajectory run_scheme(const VelocitySpace& vs, const PressureSpace& ps,
                      const TimeGrid& grid, const Problem& problem,
                      const SolverConfig& config) {
  if (config.fixed_point_tol <= 0.0 || config.linear_solver_tol <= 0.0 ||
      config.max_fixed_point_iters < 1)
    throw std::invalid_argument("run: invalid solver configuration");

  const SpatialOperators ops = assemble_spatial(vs, ps, problem.nu, config.sigma);
  SlabWorkspace ws(vs, ps, ops, grid, config.c_s);

  Trajectory traj;
  traj.grid = grid;
  traj.scheme = config.scheme;
  traj.c_s = config.c_s;
  traj.sigma = config.sigma;

  const int m = grid.degree + 1;
  VecX prev = rt_interpolate(vs, problem.initial);
  SlabBasis prev_basis;

  for (int n = 1; n <= grid.num_slabs(); ++n) {
    SlabProblem sp;
    sp.forcing = problem.forcing;
    sp.dirichlet = problem.dirichlet;
    sp.prev_end = prev;
    ws.set_slab(n, sp);
    const SlabBasis& basis = ws.basis();

    MatX w(m, vs.dim);
    SlabSolution sol;
    int iters = 0;
    try {
      if (config.scheme == Scheme::semi_implicit && n >= 2) {
        w = tilde_transfer(prev_basis, basis) * traj.velocity.back();
        sol = ws.solve(w, config.linear_solver_tol, false);
        iters = 1;
      } else {
        for (int i = 0; i < m; ++i) w.row(i) = prev.transpose();
        bool converged = false;
        for (int s = 1; s <= config.max_fixed_point_iters; ++s) {
          sol = ws.solve(w, config.linear_solver_tol, false);
          double dist = 0.0, scale = 0.0;
          for (int i = 0; i < m; ++i) {
            dist = std::max(ws.mass_norm((sol.u.row(i) - w.row(i)).transpose()), dist);
            scale = std::max(ws.mass_norm(sol.u.row(i).transpose()), scale);
          }
          const double delta = dist / (1.0 + scale);
          w = sol.u;
          iters = s;
          if (delta <= config.fixed_point_tol) {
            converged = true;
            break;
          }
          if (s == config.max_fixed_point_iters)
            throw FixedPointError("fixed point did not converge on slab " +
                                      std::to_string(n) + " (residual " +
                                      std::to_string(delta) + ")",
                                  n, delta);
        }
        (void)converged;
      }
    } catch (SolverError& err) {
      if (err.slab < 0) err.slab = n;
      throw;
    }

    traj.velocity.push_back(sol.u);
    traj.pressure.push_back(sol.p);
    // gamma of the scheme: gamma(u) for the (converged) fully implicit
    // solve, gamma(tilde u) for semi-implicit slabs n >= 2
    MatX gamma(m, vs.mesh->num_facets());
    if (config.scheme == Scheme::semi_implicit && n >= 2)
      for (int i = 0; i < m; ++i)
        gamma.row(i) = facet_gamma(vs, w.row(i).transpose(), config.c_s).transpose();
    else
      for (int i = 0; i < m; ++i)
        gamma.row(i) = facet_gamma(vs, sol.u.row(i).transpose(), config.c_s).transpose();
    traj.gamma.push_back(gamma);
    traj.fp_iters.push_back(iters);
    prev = sol.u.transpose() * basis.right_value;
    traj.end_velocity.push_back(prev);
    traj.max_div_residual = std::max(traj.max_div_residual, ws.div_residual(sol.u));
    prev_basis = basis;
  }
  return traj;
}

} // namespace

Trajectory run_fully_implicit(const VelocitySpace& vs, const PressureSpace& ps,
                              const TimeGrid& grid, const Problem& problem,
                              const SolverConfig& config) {
  if (config.scheme != Scheme::fully_implicit)
    throw std::invalid_argument("run_fully_implicit: config.scheme mismatch");
  return run_scheme(vs, ps, grid, problem, config);
}

Trajectory run_semi_implicit(const VelocitySpace& vs, const PressureSpace& ps,
                             const TimeGrid& grid, const Problem& problem,
                             const SolverConfig& config) {
  if (config.scheme != Scheme::semi_implicit)
    throw std::invalid_argument("run_semi_implicit: config.scheme mismatch");
  return run_scheme(vs, ps, grid, problem, config);
}

SlabSolution solve_linearized_slab(const SpatialOperators& ops, const VelocitySpace& vs,
                                   const PressureSpace& ps, const SlabBasis& basis,
                                   const MatX& w_nodal, const SlabProblem& problem,
                                   const SolverConfig& config) {
  const int m = basis.num_nodes();
  std::vector<ConvectionSnapshot> conv;
  for (int i = 0; i < m; ++i)
    conv.push_back(assemble_convection(vs, w_nodal.row(i).transpose(), config.c_s));
  const SlabSystem sys = build_slab_system(ops, vs, ps, basis, conv, problem);
  const VecX x = linear_solve(sys, config.linear_solver_tol);
  SlabSolution sol;
  sol.u.resize(m, vs.dim);
  sol.p.resize(m, ps.dim);
  for (int i = 0; i < m; ++i) {
    sol.u.row(i) = x.segment(sys.u_index(i, 0), vs.dim).transpose();
    sol.p.row(i) = x.segment(sys.p_index(i, 0), ps.dim).transpose();
  }
  return sol;
}

VecX linear_solve(const SlabSystem& system, double tol) {
  return linear_solve(system.matrix, system.rhs, tol);
}

} // namespace nsdg
