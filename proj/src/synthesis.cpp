#include "platoon/synthesis.hpp"

#include <cmath>

#include "platoon/matrix_io.hpp"

namespace platoon {

using Eigen::MatrixXd;
using Eigen::VectorXd;

SynthesisProblem SynthesisProblem::from_batch(const DataBatch& batch,
                                              const LiftedSystem& sys, double delta_in) {
  if (!sys.discretized())
    throw std::invalid_argument("SynthesisProblem: system must be discretized");
  SynthesisProblem p;
  p.U0 = batch.U0;
  p.Z0 = batch.Z0;
  p.X1 = batch.X1;
  p.D = sys.D;
  p.delta = delta_in;
  p.n_x = sys.layout.n_x;
  p.n_u = sys.layout.n_u;
  p.n_w = sys.layout.n_w;
  p.n_z = sys.layout.n_z;
  p.T = batch.T;
  p.Delta = delta_in * std::sqrt(static_cast<double>(batch.T)) *
            MatrixXd::Identity(p.n_w, p.n_w);
  p.validate();
  return p;
}

void SynthesisProblem::validate() const {
  if (eps1 <= 0.0 || eps2 <= 0.0)
    throw std::invalid_argument("SynthesisProblem: eps1 and eps2 must be positive");
  if (lambda1 < 0.0 || lambda2 < 0.0)
    throw std::invalid_argument("SynthesisProblem: objective weights must be nonnegative");
  if (margin <= 0.0) throw std::invalid_argument("SynthesisProblem: margin must be positive");
  if (delta < 0.0) throw std::invalid_argument("SynthesisProblem: delta must be nonnegative");
  if (U0.rows() != n_u || U0.cols() != T || Z0.rows() != n_z || Z0.cols() != T ||
      X1.rows() != n_x || X1.cols() != T)
    throw std::invalid_argument("SynthesisProblem: data dimensions are inconsistent");
  if (D.rows() != n_x || D.cols() != n_w || Delta.rows() != n_w || Delta.cols() != n_w)
    throw std::invalid_argument("SynthesisProblem: D/Delta dimensions are inconsistent");
  if ((Delta.diagonal().array() < 0.0).any())
    throw std::invalid_argument("SynthesisProblem: Delta must be nonnegative");
  if (n_z < n_x) throw std::invalid_argument("SynthesisProblem: n_z < n_x");
}

int VariableMap::p_index(int i, int j) const {
  if (i > j) std::swap(i, j);
  return i * n_x - i * (i - 1) / 2 + (j - i);
}

VectorXd VariableMap::pack(const MatrixXd& P, const MatrixXd& Y, const MatrixXd& G2,
                           double gamma, double eta) const {
  VectorXd x = VectorXd::Zero(count());
  for (int i = 0; i < n_x; ++i)
    for (int j = i; j < n_x; ++j) x(p_index(i, j)) = P(i, j);
  for (int c = 0; c < n_x; ++c)
    for (int t = 0; t < cols; ++t) x(y_index(t, c)) = Y(t, c);
  for (int c = 0; c < n_z - n_x; ++c)
    for (int t = 0; t < cols; ++t) x(g2_index(t, c)) = G2(t, c);
  x(gamma_index()) = gamma;
  if (with_eta) x(eta_index()) = eta;
  return x;
}

VariableMap variable_map(const SynthesisProblem& problem) {
  VariableMap vm;
  vm.n_x = problem.n_x;
  vm.n_z = problem.n_z;
  vm.cols = problem.T;
  vm.with_eta = problem.lambda2 > 0.0 && problem.n_z > problem.n_x;
  return vm;
}

ConicProgram assemble_lmi(const SynthesisProblem& problem) {
  problem.validate();
  const int n_x = problem.n_x, n_w = problem.n_w, n_z = problem.n_z, T = problem.T;
  const int n_q = n_z - n_x;
  const VariableMap vm = variable_map(problem);

  ConicProgram prog;
  prog.n_vars = vm.count();
  prog.objective = VectorXd::Zero(prog.n_vars);
  prog.objective(vm.gamma_index()) = problem.lambda1;
  if (vm.with_eta) prog.objective(vm.eta_index()) = problem.lambda2;

  // ---- robust-performance block: 7x7 structure, side 4 n_x + 2 n_w + T ----
  PsdBlock main;
  main.name = "robust_performance";
  const int off1 = 0;
  const int off2 = n_x;
  const int off3 = n_x + n_w;
  const int off4 = 2 * n_x + n_w;
  const int off5 = 3 * n_x + n_w;
  const int off6 = 4 * n_x + n_w;
  const int off7 = 4 * n_x + n_w + T;
  main.side = 4 * n_x + 2 * n_w + T;

  const MatrixXd DDelta = problem.D * problem.Delta;
  for (int i = 0; i < n_w; ++i)
    for (int j = 0; j < n_x; ++j)
      if (problem.D(j, i) != 0.0)
        main.constant.emplace_back(off2 + i, off5 + j, problem.D(j, i));
  for (int i = 0; i < n_x; ++i)
    for (int j = 0; j < n_w; ++j)
      if (DDelta(i, j) != 0.0) main.constant.emplace_back(off4 + i, off7 + j, DDelta(i, j));
  for (int t = 0; t < T; ++t) main.constant.emplace_back(off6 + t, off6 + t, problem.eps2);
  for (int i = 0; i < n_w; ++i)
    main.constant.emplace_back(off7 + i, off7 + i, 1.0 / problem.eps2);
  for (int r = 0; r < main.side; ++r) main.constant.emplace_back(r, r, -problem.margin);

  const double c44 = problem.eps1 / (1.0 + problem.eps1);
  const double c55 = 1.0 / problem.eps1;
  for (int i = 0; i < n_x; ++i) {
    for (int j = i; j < n_x; ++j) {
      const int v = vm.p_index(i, j);
      main.coeffs.push_back({v, off1 + i, off1 + j, 1.0});
      main.coeffs.push_back({v, off4 + i, off4 + j, c44});
      main.coeffs.push_back({v, off5 + i, off5 + j, c55});
    }
    // P placed as a full (asymmetric-position) coupling block
    for (int j = 0; j < n_x; ++j)
      main.coeffs.push_back({vm.p_index(i, j), off1 + i, off3 + j, 1.0});
  }
  for (int i = 0; i < n_w; ++i)
    main.coeffs.push_back({vm.gamma_index(), off2 + i, off2 + i, 1.0});
  for (int i = 0; i < n_x; ++i)
    main.coeffs.push_back({vm.gamma_index(), off3 + i, off3 + i, 1.0});
  for (int t = 0; t < T; ++t) {
    for (int c = 0; c < n_x; ++c) {
      const int v = vm.y_index(t, c);
      // (X1 Y)' coupling: entry (off1 + c, off4 + b) picks up X1(b, t) * Y(t, c)
      for (int b = 0; b < n_x; ++b)
        if (problem.X1(b, t) != 0.0)
          main.coeffs.push_back({v, off1 + c, off4 + b, problem.X1(b, t)});
      main.coeffs.push_back({v, off1 + c, off6 + t, 1.0});
    }
  }
  prog.blocks.push_back(std::move(main));

  // ---- P and gamma positivity with margin ----
  PsdBlock pblk;
  pblk.name = "P_margin";
  pblk.side = n_x;
  for (int i = 0; i < n_x; ++i) pblk.constant.emplace_back(i, i, -problem.margin);
  for (int i = 0; i < n_x; ++i)
    for (int j = i; j < n_x; ++j) pblk.coeffs.push_back({vm.p_index(i, j), i, j, 1.0});
  prog.blocks.push_back(std::move(pblk));

  PsdBlock gblk;
  gblk.name = "gamma_margin";
  gblk.side = 1;
  gblk.constant.emplace_back(0, 0, -problem.margin);
  gblk.coeffs.push_back({vm.gamma_index(), 0, 0, 1.0});
  prog.blocks.push_back(std::move(gblk));

  // ---- norm epigraph on G2 ----
  if (vm.with_eta) {
    PsdBlock nblk;
    if (problem.norm == G2Norm::Spectral) {
      nblk.name = "g2_spectral_epigraph";
      nblk.side = n_q + T;
      for (int r = 0; r < nblk.side; ++r)
        nblk.coeffs.push_back({vm.eta_index(), r, r, 1.0});
      for (int t = 0; t < T; ++t)
        for (int c = 0; c < n_q; ++c)
          nblk.coeffs.push_back({vm.g2_index(t, c), c, n_q + t, 1.0});
    } else {
      nblk.name = "g2_frobenius_epigraph";
      nblk.side = 1 + n_q * T;
      for (int r = 0; r < nblk.side; ++r)
        nblk.coeffs.push_back({vm.eta_index(), r, r, 1.0});
      for (int t = 0; t < T; ++t)
        for (int c = 0; c < n_q; ++c)
          nblk.coeffs.push_back({vm.g2_index(t, c), 0, 1 + c * T + t, 1.0});
    }
    prog.blocks.push_back(std::move(nblk));
  }

  // ---- equality couplings ----
  std::vector<EqEntry> eq;
  std::vector<double> rhs;
  int row = 0;
  // Z0 Y = [P; 0]
  for (int r = 0; r < n_z; ++r) {
    for (int c = 0; c < n_x; ++c) {
      for (int t = 0; t < T; ++t)
        if (problem.Z0(r, t) != 0.0) eq.push_back({row, vm.y_index(t, c), problem.Z0(r, t)});
      if (r < n_x) eq.push_back({row, vm.p_index(r, c), -1.0});
      rhs.push_back(0.0);
      ++row;
    }
  }
  // Z0 G2 = [0; I]
  for (int r = 0; r < n_z; ++r) {
    for (int c = 0; c < n_q; ++c) {
      for (int t = 0; t < T; ++t)
        if (problem.Z0(r, t) != 0.0)
          eq.push_back({row, vm.g2_index(t, c), problem.Z0(r, t)});
      rhs.push_back(r == n_x + c ? 1.0 : 0.0);
      ++row;
    }
  }
  // X1 G2 = 0
  for (int r = 0; r < n_x; ++r) {
    for (int c = 0; c < n_q; ++c) {
      for (int t = 0; t < T; ++t)
        if (problem.X1(r, t) != 0.0)
          eq.push_back({row, vm.g2_index(t, c), problem.X1(r, t)});
      rhs.push_back(0.0);
      ++row;
    }
  }
  prog.equalities = std::move(eq);
  prog.eq_rhs = Eigen::Map<VectorXd>(rhs.data(), static_cast<int>(rhs.size()));
  return prog;
}

MatrixXd robust_lmi_matrix(const SynthesisProblem& problem, const MatrixXd& P,
                           const MatrixXd& Y, const MatrixXd& G2, double gamma) {
  (void)G2;
  const int n_x = problem.n_x, n_w = problem.n_w, T = problem.T;
  const int off1 = 0, off2 = n_x, off3 = n_x + n_w, off4 = 2 * n_x + n_w,
            off5 = 3 * n_x + n_w, off6 = 4 * n_x + n_w, off7 = 4 * n_x + n_w + T;
  const int side = 4 * n_x + 2 * n_w + T;
  MatrixXd m = MatrixXd::Zero(side, side);
  m.block(off1, off1, n_x, n_x) = P;
  m.block(off1, off3, n_x, n_x) = P;
  m.block(off1, off4, n_x, n_x) = (problem.X1 * Y).transpose();
  m.block(off1, off6, n_x, T) = Y.transpose();
  m.block(off2, off2, n_w, n_w) = gamma * MatrixXd::Identity(n_w, n_w);
  m.block(off2, off5, n_w, n_x) = problem.D.transpose();
  m.block(off3, off3, n_x, n_x) = gamma * MatrixXd::Identity(n_x, n_x);
  m.block(off4, off4, n_x, n_x) = problem.eps1 / (1.0 + problem.eps1) * P;
  m.block(off4, off7, n_x, n_w) = problem.D * problem.Delta;
  m.block(off5, off5, n_x, n_x) = P / problem.eps1;
  m.block(off6, off6, T, T) = problem.eps2 * MatrixXd::Identity(T, T);
  m.block(off7, off7, n_w, n_w) = MatrixXd::Identity(n_w, n_w) / problem.eps2;
  const MatrixXd upper = m.triangularView<Eigen::StrictlyUpper>();
  return MatrixXd(m.triangularView<Eigen::Upper>()) + upper.transpose();
}

CompressedProblem compress(const SynthesisProblem& problem) {
  const int rho_full = problem.n_z + problem.n_x + problem.n_u;
  CompressedProblem out;
  if (problem.T <= rho_full) {
    out.problem = problem;
    out.Q = MatrixXd::Identity(problem.T, problem.T);
    return out;
  }
  MatrixXd xi(rho_full, problem.T);
  xi.topRows(problem.n_z) = problem.Z0;
  xi.middleRows(problem.n_z, problem.n_x) = problem.X1;
  xi.bottomRows(problem.n_u) = problem.U0;
  Eigen::HouseholderQR<MatrixXd> qr(xi.transpose());
  out.Q = qr.householderQ() * MatrixXd::Identity(problem.T, rho_full);
  out.problem = problem;
  out.problem.T = rho_full;
  out.problem.Z0 = problem.Z0 * out.Q;
  out.problem.X1 = problem.X1 * out.Q;
  out.problem.U0 = problem.U0 * out.Q;
  // Delta keeps the original sample count's energy bound
  return out;
}

Eigen::MatrixXd extract_gain(const MatrixXd& U0, const MatrixXd& Y, const MatrixXd& G2,
                             const MatrixXd& P, double* cond_out) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(P, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (cond_out) *cond_out = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  const MatrixXd G1 = P.ldlt().solve(Y.transpose()).transpose();
  MatrixXd K(U0.rows(), Y.cols() + G2.cols());
  K.leftCols(Y.cols()) = U0 * G1;
  if (G2.cols() > 0) K.rightCols(G2.cols()) = U0 * G2;
  return K;
}

namespace {

// Structured phase-I candidate: an identity-shaped P sized to clear the
// disturbance-energy block, interpolating Y, a minimum-norm G2 and generous
// gamma/eta. Rarely feasible by itself but well scaled.
Eigen::VectorXd heuristic_start(const SynthesisProblem& p, const VariableMap& vm) {
  const MatrixXd dd = p.D * p.Delta;
  const double alpha =
      2.0 * (1.0 + p.eps1) / p.eps1 * p.eps2 * dd.squaredNorm() + 1.0;
  const MatrixXd P0 = alpha * MatrixXd::Identity(p.n_x, p.n_x);
  MatrixXd rhs_y = MatrixXd::Zero(p.n_z, p.n_x);
  rhs_y.topRows(p.n_x) = P0;
  const MatrixXd Y0 =
      p.Z0.transpose() * (p.Z0 * p.Z0.transpose()).ldlt().solve(rhs_y);
  const int n_q = p.n_z - p.n_x;
  MatrixXd G20(p.T, n_q);
  if (n_q > 0) {
    MatrixXd S(p.n_z + p.n_x, p.T);
    S.topRows(p.n_z) = p.Z0;
    S.bottomRows(p.n_x) = p.X1;
    MatrixXd rhs_g = MatrixXd::Zero(p.n_z + p.n_x, n_q);
    rhs_g.block(p.n_x, 0, n_q, n_q) = MatrixXd::Identity(n_q, n_q);
    G20 = Eigen::CompleteOrthogonalDecomposition<MatrixXd>(S).solve(rhs_g);
  }
  const double eta0 = n_q > 0 ? 1.5 * G20.operatorNorm() + 1.0 : 0.0;
  return vm.pack(P0, Y0, G20, 10.0 * alpha + 10.0, eta0);
}

struct Unpacked {
  MatrixXd P, Y, G2;
  double gamma = 0.0, eta = 0.0;
};

Unpacked unpack(const VariableMap& vm, const VectorXd& x) {
  Unpacked u;
  u.P.resize(vm.n_x, vm.n_x);
  for (int i = 0; i < vm.n_x; ++i)
    for (int j = 0; j < vm.n_x; ++j) u.P(i, j) = x(vm.p_index(i, j));
  u.Y.resize(vm.cols, vm.n_x);
  for (int c = 0; c < vm.n_x; ++c)
    for (int t = 0; t < vm.cols; ++t) u.Y(t, c) = x(vm.y_index(t, c));
  u.G2.resize(vm.cols, vm.n_z - vm.n_x);
  for (int c = 0; c < vm.n_z - vm.n_x; ++c)
    for (int t = 0; t < vm.cols; ++t) u.G2(t, c) = x(vm.g2_index(t, c));
  u.gamma = x(vm.gamma_index());
  u.eta = vm.with_eta ? x(vm.eta_index()) : 0.0;
  return u;
}

// Minimal least-squares correction restoring the interpolation equalities
// after the solve; corrections are at solver-residual scale.
void polish_equalities(const SynthesisProblem& problem, Unpacked& u) {
  const int n_x = problem.n_x, n_z = problem.n_z;
  MatrixXd rhs_y = MatrixXd::Zero(n_z, n_x);
  rhs_y.topRows(n_x) = u.P;
  const Eigen::LDLT<MatrixXd> gram(problem.Z0 * problem.Z0.transpose());
  u.Y += problem.Z0.transpose() * gram.solve(rhs_y - problem.Z0 * u.Y);
  const int n_q = n_z - n_x;
  if (n_q > 0) {
    MatrixXd S(n_z + n_x, problem.T);
    S.topRows(n_z) = problem.Z0;
    S.bottomRows(n_x) = problem.X1;
    MatrixXd rhs_g = MatrixXd::Zero(n_z + n_x, n_q);
    rhs_g.block(n_x, 0, n_q, n_q) = MatrixXd::Identity(n_q, n_q);
    Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(S);
    u.G2 += cod.solve(rhs_g - S * u.G2);
  }
}

SynthesisResult finalize(const SynthesisProblem& full, const Unpacked& vals,
                         const ConicSolution& cs, const SynthesisProblem& used) {
  SynthesisResult r;
  r.status = cs.status;
  r.message = cs.message;
  r.iterations = cs.iterations;
  r.solve_seconds = cs.solve_seconds;
  r.eps1 = used.eps1;
  r.eps2 = used.eps2;
  r.lambda1 = used.lambda1;
  r.lambda2 = used.lambda2;
  r.delta = used.delta;
  r.P = 0.5 * (vals.P + vals.P.transpose());
  r.Y = vals.Y;
  r.G2 = vals.G2;
  r.gamma = vals.gamma;
  r.eta = vals.eta;
  r.data_hash = hash_matrices({&full.U0, &full.Z0, &full.X1});

  double cond = 0.0;
  r.K = extract_gain(full.U0, r.Y, r.G2, r.P, &cond);
  r.cond_P = cond;
  r.cond_warning = !(cond < 1e12);

  const int n_x = full.n_x, n_z = full.n_z, n_q = n_z - n_x;
  MatrixXd rhs_y = MatrixXd::Zero(n_z, n_x);
  rhs_y.topRows(n_x) = r.P;
  r.r_y = (full.Z0 * r.Y - rhs_y).lpNorm<Eigen::Infinity>();
  if (n_q > 0) {
    MatrixXd rhs_g = MatrixXd::Zero(n_z, n_q);
    rhs_g.bottomRows(n_q) = MatrixXd::Identity(n_q, n_q);
    r.r_g2 = (full.Z0 * r.G2 - rhs_g).lpNorm<Eigen::Infinity>();
    r.r_null = (full.X1 * r.G2).lpNorm<Eigen::Infinity>();
  }
  const MatrixXd G1 = r.P.ldlt().solve(r.Y.transpose()).transpose();
  MatrixXd G(full.T, n_z);
  G.leftCols(n_x) = G1;
  if (n_q > 0) G.rightCols(n_q) = r.G2;
  r.r_interp = (full.Z0 * G - MatrixXd::Identity(n_z, n_z)).lpNorm<Eigen::Infinity>();
  MatrixXd stacked(full.n_u + n_z, n_z);
  stacked.topRows(full.n_u) = r.K;
  stacked.bottomRows(n_z) = MatrixXd::Identity(n_z, n_z);
  MatrixXd data(full.n_u + n_z, full.T);
  data.topRows(full.n_u) = full.U0;
  data.bottomRows(n_z) = full.Z0;
  r.r_gain = (stacked - data * G).lpNorm<Eigen::Infinity>();

  Eigen::SelfAdjointEigenSolver<MatrixXd> es_lmi(
      robust_lmi_matrix(full, r.P, r.Y, r.G2, r.gamma), Eigen::EigenvaluesOnly);
  r.lmi_min_eig = es_lmi.eigenvalues().minCoeff();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es_p(r.P, Eigen::EigenvaluesOnly);
  r.p_min_eig = es_p.eigenvalues().minCoeff();
  return r;
}

}  // namespace

SynthesisResult solve_sdp(const SynthesisProblem& problem, const SynthesisOptions& opts) {
  problem.validate();

  SynthesisResult rejected;
  rejected.eps1 = problem.eps1;
  rejected.eps2 = problem.eps2;
  rejected.lambda1 = problem.lambda1;
  rejected.lambda2 = problem.lambda2;
  rejected.delta = problem.delta;
  rejected.data_hash = hash_matrices({&problem.U0, &problem.Z0, &problem.X1});

  if (problem.T < problem.n_z) {
    rejected.status = SolveStatus::Infeasible;
    rejected.message = "data not rich: T = " + std::to_string(problem.T) +
                       " < n_z = " + std::to_string(problem.n_z);
    return rejected;
  }
  const RichnessReport rich = check_richness(problem.Z0);
  if (!rich.full_row_rank) {
    rejected.status = SolveStatus::Infeasible;
    rejected.message = "data not rich: rank(Z0) = " + std::to_string(rich.rank) +
                       " < n_z = " + std::to_string(problem.n_z);
    return rejected;
  }

  CompressedProblem comp;
  if (opts.compress) {
    comp = compress(problem);
  } else {
    comp.problem = problem;
    comp.Q = MatrixXd::Identity(problem.T, problem.T);
  }

  std::vector<std::pair<double, double>> grid;
  if (opts.grid_search) {
    for (double e1 : {0.1, 1.0, 10.0})
      for (double e2 : {0.1, 1.0, 10.0}) grid.emplace_back(e1, e2);
  } else {
    grid.emplace_back(problem.eps1, problem.eps2);
  }

  std::optional<SynthesisResult> best;
  double total_seconds = 0.0;
  for (const auto& [e1, e2] : grid) {
    SynthesisProblem inst = comp.problem;
    inst.eps1 = e1;
    inst.eps2 = e2;
    const ConicProgram prog = assemble_lmi(inst);
    IpmOptions ipm = opts.ipm;
    ipm.x_init = heuristic_start(inst, variable_map(inst));
    const ConicSolution cs = solve_conic(prog, ipm);
    total_seconds += cs.solve_seconds;
    if (cs.status != SolveStatus::Optimal && cs.status != SolveStatus::AlmostOptimal) {
      if (!best) {
        SynthesisProblem full_inst = problem;
        full_inst.eps1 = e1;
        full_inst.eps2 = e2;
        SynthesisResult r = rejected;
        r.status = cs.status;
        r.message = cs.message.empty() ? std::string(to_string(cs.status)) : cs.message;
        r.eps1 = e1;
        r.eps2 = e2;
        r.iterations = cs.iterations;
        r.solve_seconds = total_seconds;
        best = r;
      }
      continue;
    }
    const VariableMap vm = variable_map(inst);
    Unpacked vals = unpack(vm, cs.x);
    vals.P = 0.5 * (vals.P + vals.P.transpose());
    // lift back to full sample count
    vals.Y = comp.Q * vals.Y;
    vals.G2 = comp.Q * vals.G2;
    polish_equalities(problem, vals);
    SynthesisProblem full_inst = problem;
    full_inst.eps1 = e1;
    full_inst.eps2 = e2;
    SynthesisResult r = finalize(full_inst, vals, cs, full_inst);
    const double score = r.lambda1 * r.gamma + r.lambda2 * r.eta;
    if (!best || !best->feasible() ||
        score < best->lambda1 * best->gamma + best->lambda2 * best->eta)
      best = r;
  }
  best->solve_seconds = total_seconds;
  return *best;
}

ClosedLoopDiagnostics verify_closed_loop(const SynthesisResult& result,
                                         const DataBatch& batch, const MatrixXd& D) {
  if (!batch.design_consistent || batch.W0.size() == 0)
    throw std::invalid_argument("verify_closed_loop: needs a design-consistent batch");
  ClosedLoopDiagnostics d;
  const MatrixXd residual_data = batch.X1 - D * batch.W0;
  const MatrixXd G1 = result.P.ldlt().solve(result.Y.transpose()).transpose();
  d.Abar = residual_data * G1;
  d.Ebar = result.G2.cols() > 0 ? MatrixXd(residual_data * result.G2)
                                : MatrixXd::Zero(batch.X1.rows(), 0);
  Eigen::EigenSolver<MatrixXd> es(d.Abar);
  d.spectral_radius = es.eigenvalues().cwiseAbs().maxCoeff();
  const int n_z = static_cast<int>(batch.Z0.rows());
  MatrixXd G(batch.T, n_z);
  G.leftCols(G1.cols()) = G1;
  if (result.G2.cols() > 0) G.rightCols(result.G2.cols()) = result.G2;
  d.interp_residual =
      (batch.Z0 * G - MatrixXd::Identity(n_z, n_z)).lpNorm<Eigen::Infinity>();
  d.nullspace_residual =
      result.G2.cols() > 0 ? (batch.X1 * result.G2).lpNorm<Eigen::Infinity>() : 0.0;
  return d;
}

std::vector<SubPlatoon> split_subplatoons(const PlatoonSpec& spec, int max_size) {
  spec.validate();
  if (max_size < 1) throw std::invalid_argument("split_subplatoons: max_size < 1");
  std::vector<SubPlatoon> subs;
  const int n = spec.size();
  int b = 0;
  while (b < n) {
    int e = std::min(b + max_size, n);
    while (e < n && !is_av(spec.vehicles[e])) {
      --e;
      if (e <= b)
        throw std::invalid_argument(
            "split_subplatoons: no legal boundary; a human-driven vehicle would lead");
    }
    SubPlatoon sub;
    sub.begin = b;
    sub.end = e;
    sub.spec = spec;
    sub.spec.vehicles.assign(spec.vehicles.begin() + b, spec.vehicles.begin() + e);
    subs.push_back(std::move(sub));
    b = e;
  }
  return subs;
}

DataBatch slice_batch(const DataBatch& batch, const PlatoonSpec& global_spec,
                      const SubPlatoon& sub) {
  const LiftingLayout L = make_layout(global_spec);
  std::vector<int> x_rows, z_rows, u_rows, w_rows;
  for (int i = sub.begin; i < sub.end; ++i) {
    for (int k = 0; k < 3; ++k) x_rows.push_back(3 * i + k);
    w_rows.push_back(i);
  }
  z_rows = x_rows;
  int av_ordinal = 0;
  for (int i = 0; i < global_spec.size(); ++i) {
    if (!is_av(global_spec.vehicles[i])) continue;
    if (i >= sub.begin && i < sub.end) {
      u_rows.push_back(av_ordinal);
      z_rows.push_back(L.monomial_offset[i]);
      z_rows.push_back(L.monomial_offset[i] + 1);
    }
    ++av_ordinal;
  }
  DataBatch out;
  out.T = batch.T;
  out.t_s = batch.t_s;
  out.design_consistent = batch.design_consistent;
  out.U0 = batch.U0(u_rows, Eigen::all);
  out.X0 = batch.X0(x_rows, Eigen::all);
  out.X1 = batch.X1(x_rows, Eigen::all);
  out.Z0 = batch.Z0(z_rows, Eigen::all);
  if (batch.W0.size() > 0) out.W0 = batch.W0(w_rows, Eigen::all);
  return out;
}

Lemma2Report lemma2_bound_check(const MatrixXd& M, const MatrixXd& N, const MatrixXd& W,
                                const MatrixXd& Delta, double eps) {
  if (eps <= 0.0) throw std::invalid_argument("lemma2_bound_check: eps must be positive");
  const auto n = M.rows();
  const auto T = M.cols();
  const auto n_w = W.rows();
  if (W.cols() != T || N.rows() != n_w || N.cols() != n || Delta.rows() != n_w ||
      Delta.cols() != n_w)
    throw std::invalid_argument("lemma2_bound_check: dimension mismatch");

  Lemma2Report rep;
  const MatrixXd gram_gap = Delta * Delta.transpose() - W * W.transpose();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es_pre(gram_gap, Eigen::EigenvaluesOnly);
  rep.precondition_ok =
      es_pre.eigenvalues().minCoeff() >=
      -1e-9 * (1.0 + (Delta * Delta.transpose()).lpNorm<Eigen::Infinity>());

  const MatrixXd lhs = M * W.transpose() * N + N.transpose() * W * M.transpose();
  const MatrixXd rhs = M * M.transpose() / eps +
                       eps * N.transpose() * Delta * Delta.transpose() * N;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * ((rhs - lhs) + (rhs - lhs).transpose()),
                                             Eigen::EigenvaluesOnly);
  rep.margin = es.eigenvalues().minCoeff();
  rep.holds = rep.margin >= -1e-9;
  return rep;
}

}  // namespace platoon
