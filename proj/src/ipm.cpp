#include "platoon/ipm.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>

#include "platoon/gram_kernel.hpp"

namespace platoon {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd unflatten(const BlockOperator& op, const VectorXd& flat) {
  MatrixXd m(op.side, op.side);
  for (int r = 0; r < op.side; ++r)
    for (int c = 0; c < op.side; ++c) m(r, c) = flat(r * op.side + c);
  return m;
}

double smallest_eigenvalue(const MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

struct Blocks {
  std::vector<BlockOperator> ops;
  std::vector<MatrixXd> F0;
  int nu = 0;  // total barrier parameter (sum of sides)

  MatrixXd value(size_t k, const VectorXd& z) const {
    return F0[k] + unflatten(ops[k], ops[k].Gflat.transpose() * z);
  }
};

// Damped-Newton minimization of t * c'z - sum_k logdet F_k(z) from a strictly
// feasible start. An optional predicate stops the descent early (phase I only
// needs the slack to cross zero, not the exact center).
class Centerer {
 public:
  Centerer(const Blocks& blocks, const VectorXd& cost) : blocks_(blocks), c_(cost) {
    llts_.resize(blocks_.ops.size());
  }

  bool parallel = true;
  bool verbose = false;
  int newton_steps = 0;
  double box_radius = 0.0;  ///< > 0 adds a -log box barrier taming recession
  std::function<bool(const VectorXd&)> early_stop;

  bool factor(const VectorXd& z) {
    if (box_radius > 0.0 && z.lpNorm<Eigen::Infinity>() >= box_radius) return false;
    for (size_t k = 0; k < blocks_.ops.size(); ++k) {
      llts_[k].compute(blocks_.value(k, z));
      if (llts_[k].info() != Eigen::Success) return false;
    }
    return true;
  }

  enum class Outcome { Centered, EarlyStop, Stalled, Budget };

  // z must be strictly feasible on entry; stays strictly feasible.
  Outcome center(double t, VectorXd& z, int max_steps, double tol_decrement2) {
    if (!factor(z)) return Outcome::Stalled;
    double phi = t * c_.dot(z) + barrier(z);
    const int q = static_cast<int>(z.size());
    MatrixXd h(q, q);
    MatrixXd wflat;
    for (int step = 0; step < max_steps; ++step) {
      VectorXd grad = t * c_;
      h.setZero();
      for (size_t k = 0; k < blocks_.ops.size(); ++k) {
        const BlockOperator& op = blocks_.ops[k];
        const MatrixXd sinv = llts_[k].solve(MatrixXd::Identity(op.side, op.side));
        grad -= gram_contract(op, sinv);
        if (parallel) {
          gram_scaled_mats_parallel(op, sinv, sinv, wflat);
          gram_accumulate_parallel(op, wflat, h);
        } else {
          gram_scaled_mats_serial(op, sinv, sinv, wflat);
          gram_accumulate_serial(op, wflat, h);
        }
      }
      if (box_radius > 0.0) {
        for (int v = 0; v < q; ++v) {
          const double lo = box_radius + z(v), hi = box_radius - z(v);
          grad(v) += 1.0 / hi - 1.0 / lo;
          h(v, v) += 1.0 / (lo * lo) + 1.0 / (hi * hi);
        }
      }
      // exact Newton solve when the factorization holds; the eigenvalue
      // fallback only floors true roundoff negatives, so long flat-valley
      // steps survive and the line search guards against overshoot
      VectorXd dz;
      Eigen::LLT<MatrixXd> llt_h(h);
      if (llt_h.info() == Eigen::Success) {
        dz = -llt_h.solve(grad);
      } else {
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(h);
        if (es.info() != Eigen::Success) return Outcome::Stalled;
        const double floor = std::max(es.eigenvalues().maxCoeff(), 1e-300) * 1e-15;
        VectorXd inv_eigs = es.eigenvalues();
        for (int i = 0; i < q; ++i) inv_eigs(i) = 1.0 / std::max(inv_eigs(i), floor);
        dz = -(es.eigenvectors() *
               (inv_eigs.array() * (es.eigenvectors().transpose() * grad).array())
                   .matrix());
      }
      const double decrement2 = -grad.dot(dz);
      ++newton_steps;
      if (verbose && newton_steps % 25 == 0)
        std::cerr << "  newton " << newton_steps << " t=" << t
                  << " lambda2=" << decrement2 << " phi=" << phi << "\n";
      if (decrement2 <= tol_decrement2) return Outcome::Centered;

      double a = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 52 && a > 1e-15; ++ls) {
        const VectorXd trial = z + a * dz;
        if (factor(trial)) {
          const double phi_trial = t * c_.dot(trial) + barrier(trial);
          if (phi_trial <= phi + 0.01 * a * grad.dot(dz)) {
            z = trial;
            phi = phi_trial;
            moved = true;
            break;
          }
        }
        a *= 0.5;
      }
      if (verbose && (newton_steps % 25 == 0 || !moved)) {
        std::cerr << "    step a=" << (moved ? a : 0.0) << " |dz|=" <<
            dz.lpNorm<Eigen::Infinity>() << " block_mineigs:";
        for (size_t k = 0; k < blocks_.ops.size(); ++k)
          std::cerr << " " << smallest_eigenvalue(blocks_.value(k, z));
        std::cerr << "\n";
      }
      if (!moved) {
        factor(z);  // restore factorizations of the incumbent
        return Outcome::Stalled;
      }
      if (early_stop && early_stop(z)) return Outcome::EarlyStop;
    }
    return Outcome::Budget;
  }

 private:
  const Blocks& blocks_;
  const VectorXd& c_;
  std::vector<Eigen::LLT<MatrixXd>> llts_;

  double barrier(const VectorXd& z) const {
    double val = 0.0;
    for (const auto& llt : llts_) {
      const MatrixXd& l = llt.matrixLLT();
      for (int i = 0; i < l.rows(); ++i) val -= 2.0 * std::log(l(i, i));
    }
    if (box_radius > 0.0)
      for (int v = 0; v < z.size(); ++v)
        val -= std::log(box_radius - z(v)) + std::log(box_radius + z(v));
    return val;
  }
};

// Interior hunt: ADMM on  min s  s.t.  F_k(z) + s I = V_k >= 0. Splitting
// methods shrug off the ill-conditioning that stalls Newton far from the
// central path, and the minimum-s point is the deepest interior point. We
// stop as soon as the iterate is verifiably strictly inside.
bool admm_interior_hunt(const Blocks& blocks, VectorXd& z, int max_iters,
                        bool verbose, double* slack_out) {
  const int q = static_cast<int>(z.size());
  const size_t nblk = blocks.ops.size();

  // normal matrix of (z, s) -> (M_k(z, s))_k
  MatrixXd gram = MatrixXd::Zero(q + 1, q + 1);
  for (size_t k = 0; k < nblk; ++k) {
    const BlockOperator& op = blocks.ops[k];
    gram.topLeftCorner(q, q).noalias() += op.Gflat * op.Gflat.transpose();
    VectorXd diag_inner(q);
    for (int j = 0; j < q; ++j) diag_inner(j) = op.G[j].trace();
    gram.block(0, q, q, 1) += diag_inner;
    gram.block(q, 0, 1, q) += diag_inner.transpose();
    gram(q, q) += op.side;
  }
  gram.diagonal().array() += 1e-10 * (1.0 + gram.trace() / (q + 1));
  const Eigen::LLT<MatrixXd> gram_llt(gram);
  if (gram_llt.info() != Eigen::Success) return false;

  double worst = 0.0;
  for (size_t k = 0; k < nblk; ++k)
    worst = std::min(worst, smallest_eigenvalue(blocks.value(k, z)));
  double s = -1.2 * worst + 1e-3;

  std::vector<MatrixXd> V(nblk), U(nblk);
  for (size_t k = 0; k < nblk; ++k) {
    const int side = blocks.ops[k].side;
    V[k] = blocks.value(k, z) + s * MatrixXd::Identity(side, side);
    U[k] = MatrixXd::Zero(side, side);
  }

  const double rho_weight = 1.0;  // objective weight on s relative to penalty
  for (int it = 0; it < max_iters; ++it) {
    // (z, s) update: least squares against V - U
    VectorXd rhs = VectorXd::Zero(q + 1);
    for (size_t k = 0; k < nblk; ++k) {
      const MatrixXd target = V[k] - U[k] - blocks.F0[k];
      rhs.head(q) += gram_contract(blocks.ops[k], target);
      rhs(q) += target.trace();
    }
    rhs(q) -= rho_weight;
    const VectorXd y = gram_llt.solve(rhs);
    z = y.head(q);
    s = y(q);

    // projection and dual ascent
    for (size_t k = 0; k < nblk; ++k) {
      const int side = blocks.ops[k].side;
      const MatrixXd m =
          blocks.value(k, z) + s * MatrixXd::Identity(side, side) + U[k];
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (m + m.transpose()));
      V[k] = es.eigenvectors() *
             es.eigenvalues().cwiseMax(0.0).asDiagonal() *
             es.eigenvectors().transpose();
      U[k] += blocks.value(k, z) + s * MatrixXd::Identity(side, side) - V[k];
    }

    if (it % 25 == 24 || s < -1e-4) {
      double lam = std::numeric_limits<double>::infinity();
      for (size_t k = 0; k < nblk; ++k)
        lam = std::min(lam, smallest_eigenvalue(blocks.value(k, z)));
      if (verbose && it % 200 == 199)
        std::cerr << "  admm it " << it << " s=" << s << " lam_min=" << lam << "\n";
      if (slack_out) *slack_out = -lam;
      if (lam > 1e-8) return true;
    }
  }
  return false;
}

}  // namespace

ConicSolution solve_conic(const ConicProgram& program, const IpmOptions& opts) {
  using clock = std::chrono::steady_clock;
  const auto t_start = clock::now();
  ConicSolution sol;
  const auto finish = [&](ConicSolution s) {
    s.solve_seconds = std::chrono::duration<double>(clock::now() - t_start).count();
    return s;
  };

  const int n = program.n_vars;
  if (n <= 0 || program.objective.size() != n) {
    sol.message = "malformed program";
    return finish(sol);
  }

  // Column equilibration: x = scale .* xs tames the wildly different
  // magnitudes of the decision variables.
  VectorXd scale = VectorXd::Zero(n);
  for (const auto& b : program.blocks)
    for (const auto& c : b.coeffs) scale(c.var) = std::max(scale(c.var), std::abs(c.coeff));
  for (const auto& e : program.equalities)
    scale(e.var) = std::max(scale(e.var), std::abs(e.coeff));
  for (int v = 0; v < n; ++v) scale(v) = scale(v) > 1e-12 ? 1.0 / std::sqrt(scale(v)) : 1.0;

  // Eliminate the (scaled) equality system: xs = x0 + N z.
  VectorXd x0 = VectorXd::Zero(n);
  MatrixXd N;
  if (program.eq_rows() > 0) {
    MatrixXd E = MatrixXd::Zero(program.eq_rows(), n);
    for (const auto& e : program.equalities) E(e.row, e.var) += e.coeff * scale(e.var);
    Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(E);
    x0 = cod.solve(program.eq_rhs);
    const double res = (E * x0 - program.eq_rhs).lpNorm<Eigen::Infinity>();
    if (res > 1e-7 * (1.0 + program.eq_rhs.lpNorm<Eigen::Infinity>())) {
      sol.status = SolveStatus::Infeasible;
      sol.message = "equality system is inconsistent";
      return finish(sol);
    }
    Eigen::ColPivHouseholderQR<MatrixXd> qr(E.transpose());
    const int rank = static_cast<int>(qr.rank());
    const MatrixXd qfull = qr.householderQ();
    N = qfull.rightCols(n - rank);
  } else {
    N = MatrixXd::Identity(n, n);
  }
  const int q = static_cast<int>(N.cols());

  const auto fill_solution = [&](const VectorXd& z) {
    sol.x = (scale.array() * (x0 + N * z).array()).matrix();
    sol.objective = program.objective.dot(sol.x);
    sol.eq_residual = program.eq_rows() == 0
                          ? 0.0
                          : program.equality_residual(sol.x).lpNorm<Eigen::Infinity>();
    sol.min_block_eig = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < program.blocks.size(); ++k)
      sol.min_block_eig =
          std::min(sol.min_block_eig, smallest_eigenvalue(program.block_value(
                                          static_cast<int>(k), sol.x)));
  };

  if (q == 0) {
    fill_solution(VectorXd::Zero(0));
    sol.status = sol.min_block_eig >= -1e-9 ? SolveStatus::Optimal : SolveStatus::Infeasible;
    if (sol.status == SolveStatus::Infeasible) sol.message = "pinned point violates cone";
    return finish(sol);
  }

  // Reduced block operators over the scaled variables.
  Blocks blocks;
  blocks.ops.resize(program.blocks.size());
  blocks.F0.resize(program.blocks.size());
  double f0_scale = 1.0;
  for (size_t k = 0; k < program.blocks.size(); ++k) {
    const PsdBlock& b = program.blocks[k];
    BlockOperator& op = blocks.ops[k];
    op.side = b.side;
    op.G.assign(q, MatrixXd::Zero(b.side, b.side));
    MatrixXd f0 = MatrixXd::Zero(b.side, b.side);
    for (const auto& t : b.constant) {
      f0(t.row, t.col) += t.value;
      if (t.row != t.col) f0(t.col, t.row) += t.value;
    }
    for (const auto& c : b.coeffs) {
      const double coeff = c.coeff * scale(c.var);
      const double base = coeff * x0(c.var);
      f0(c.row, c.col) += base;
      if (c.row != c.col) f0(c.col, c.row) += base;
      for (int j = 0; j < q; ++j) {
        const double v = coeff * N(c.var, j);
        if (v == 0.0) continue;
        op.G[j](c.row, c.col) += v;
        if (c.row != c.col) op.G[j](c.col, c.row) += v;
      }
    }
    op.finalize();
    blocks.F0[k] = std::move(f0);
    blocks.nu += b.side;
    f0_scale = std::max(f0_scale, blocks.F0[k].lpNorm<Eigen::Infinity>());
  }
  const VectorXd c_scaled = (program.objective.array() * scale.array()).matrix();
  const VectorXd c_red = N.transpose() * c_scaled;
  const double obj_const = c_scaled.dot(x0);

  // Candidate start: caller-provided guess projected onto the equality
  // manifold, otherwise the minimum-norm equality solution.
  VectorXd z = VectorXd::Zero(q);
  if (opts.x_init.size() == n) {
    const VectorXd xs_init = (opts.x_init.array() / scale.array()).matrix();
    z = N.transpose() * (xs_init - x0);
  }

  // ---- phase I: land strictly inside every cone ----
  double worst = 0.0;
  for (size_t k = 0; k < program.blocks.size(); ++k)
    worst = std::min(worst, smallest_eigenvalue(blocks.value(k, z)));

  if (worst < 1e-9) {
    double slack = 0.0;
    const bool interior =
        admm_interior_hunt(blocks, z, opts.phase1_iterations, opts.verbose, &slack);
    sol.phase1_slack = slack;
    if (!interior) {
      fill_solution(z);
      sol.status = SolveStatus::Infeasible;
      sol.message = "phase I found no strictly feasible point";
      return finish(sol);
    }
  }

  // ---- phase II: follow the central path on the objective ----
  Centerer ctr(blocks, c_red);
  ctr.parallel = opts.parallel_kernels;
  ctr.verbose = opts.verbose;
  if (!ctr.factor(z)) {
    fill_solution(z);
    sol.status = SolveStatus::NumericalFailure;
    sol.message = "phase I point is not strictly feasible";
    return finish(sol);
  }

  double t = 1.0;
  bool converged = false;
  while (sol.iterations + ctr.newton_steps < opts.max_iterations) {
    const auto out = ctr.center(t, z, 300, 1e-9);
    if (out == Centerer::Outcome::Stalled && t <= 1.0) {
      fill_solution(z);
      sol.iterations += ctr.newton_steps;
      sol.status = SolveStatus::NumericalFailure;
      sol.message = "Newton centering failed";
      return finish(sol);
    }
    const double obj = c_red.dot(z) + obj_const;
    sol.duality_gap = blocks.nu / t;
    if (opts.verbose)
      std::cerr << "ipm stage t=" << t << " gap=" << sol.duality_gap << " obj=" << obj
                << "\n";
    if (blocks.nu / t <= opts.tol_gap * (1.0 + std::abs(obj))) {
      converged = true;
      break;
    }
    if (out == Centerer::Outcome::Stalled) break;  // arithmetic limit reached
    t *= opts.t_factor;
  }
  sol.iterations += ctr.newton_steps;
  fill_solution(z);
  if (converged) {
    sol.status = SolveStatus::Optimal;
  } else if (sol.duality_gap <= 1e-5 * (1.0 + std::abs(sol.objective))) {
    sol.status = SolveStatus::AlmostOptimal;
    sol.message = "stopped before the gap target";
  } else {
    sol.status = SolveStatus::IterationLimit;
    sol.message = "iteration limit reached";
  }
  return finish(sol);
}

}  // namespace platoon
