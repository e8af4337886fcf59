#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "platoon/gram_kernel.hpp"
#include "platoon/ipm.hpp"
#include "platoon/rng.hpp"

using namespace platoon;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

void add_sym(PsdBlock& b, int var, const MatrixXd& m) {
  for (int i = 0; i < m.rows(); ++i)
    for (int j = i; j < m.cols(); ++j)
      if (m(i, j) != 0.0) b.coeffs.push_back({var, i, j, m(i, j)});
}

void add_const(PsdBlock& b, const MatrixXd& m) {
  for (int i = 0; i < m.rows(); ++i)
    for (int j = i; j < m.cols(); ++j)
      if (m(i, j) != 0.0) b.constant.emplace_back(i, j, m(i, j));
}

// three-variable reference instance; optimal values frozen from an
// independent conic solver
ConicProgram reference_program() {
  ConicProgram prog;
  prog.n_vars = 3;
  prog.objective = VectorXd(3);
  prog.objective << 1.0, -0.5, 0.8;

  MatrixXd f0(3, 3), f1(3, 3), f2(3, 3), f3(3, 3);
  f0 << 2, 0.5, 0, 0.5, 2, 0.3, 0, 0.3, 1.5;
  f1 << 1, 0.2, 0, 0.2, 0, 0, 0, 0, -0.5;
  f2 << 0, 0, 0.4, 0, 1, 0, 0.4, 0, 0;
  f3 << 0.3, 0, 0, 0, -0.2, 0, 0, 0, 1;

  PsdBlock lmi;
  lmi.name = "lmi";
  lmi.side = 3;
  add_const(lmi, f0);
  add_sym(lmi, 0, f1);
  add_sym(lmi, 1, f2);
  add_sym(lmi, 2, f3);
  prog.blocks.push_back(std::move(lmi));

  PsdBlock bound;
  bound.name = "y0_lower";
  bound.side = 1;
  bound.constant.emplace_back(0, 0, 2.0);
  bound.coeffs.push_back({0, 0, 0, 1.0});
  prog.blocks.push_back(std::move(bound));
  return prog;
}

}  // namespace

TEST_CASE("program evaluators") {
  const ConicProgram prog = reference_program();
  VectorXd x(3);
  x << 1.0, 2.0, -1.0;
  const MatrixXd m = prog.block_value(0, x);
  CHECK(m(0, 0) == doctest::Approx(2 + 1 - 0.3));
  CHECK(m(0, 1) == doctest::Approx(0.5 + 0.2));
  CHECK(m(1, 0) == m(0, 1));
  CHECK(m(0, 2) == doctest::Approx(0.8));
  CHECK(prog.block_value(1, x)(0, 0) == doctest::Approx(3.0));
}

TEST_CASE("scalar matrix geometric mean") {
  // min gamma with [[gamma, 1], [1, gamma]] >= 0 attains gamma = 1
  ConicProgram prog;
  prog.n_vars = 1;
  prog.objective = VectorXd::Ones(1);
  PsdBlock b;
  b.side = 2;
  b.constant.emplace_back(0, 1, 1.0);
  b.coeffs.push_back({0, 0, 0, 1.0});
  b.coeffs.push_back({0, 1, 1, 1.0});
  prog.blocks.push_back(std::move(b));

  const ConicSolution sol = solve_conic(prog);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(sol.min_block_eig >= -1e-9);
}

TEST_CASE("reference instance matches the independent solver") {
  const ConicSolution sol = solve_conic(reference_program());
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(-3.079860391178).epsilon(1e-6));
  CHECK(sol.min_block_eig >= -1e-8);
}

TEST_CASE("equality constraints are honored exactly") {
  ConicProgram prog = reference_program();
  prog.equalities = {{0, 0, 1.0}, {0, 1, 1.0}, {0, 2, 1.0}};
  prog.eq_rhs = VectorXd::Ones(1);
  const ConicSolution sol = solve_conic(prog);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(-2.870102995382).epsilon(1e-6));
  CHECK(sol.eq_residual < 1e-10);
  CHECK(std::abs(sol.x.sum() - 1.0) < 1e-10);
}

TEST_CASE("linear program via diagonal blocks") {
  // min x + 2y st x + y = 1, x >= 0, y >= 0 -> (1, 0), value 1
  ConicProgram prog;
  prog.n_vars = 2;
  prog.objective = VectorXd(2);
  prog.objective << 1.0, 2.0;
  prog.equalities = {{0, 0, 1.0}, {0, 1, 1.0}};
  prog.eq_rhs = VectorXd::Ones(1);
  for (int v = 0; v < 2; ++v) {
    PsdBlock b;
    b.side = 1;
    b.coeffs.push_back({v, 0, 0, 1.0});
    prog.blocks.push_back(std::move(b));
  }
  const ConicSolution sol = solve_conic(prog);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(sol.x(0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sol.x(1) == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("inconsistent equalities are reported infeasible") {
  ConicProgram prog = reference_program();
  prog.equalities = {{0, 0, 1.0}, {1, 0, 1.0}};
  prog.eq_rhs = VectorXd(2);
  prog.eq_rhs << 1.0, 2.0;
  const ConicSolution sol = solve_conic(prog);
  CHECK(sol.status == SolveStatus::Infeasible);
}

TEST_CASE("infeasible cone is detected") {
  // x >= 1 and -x >= 0 cannot hold together
  ConicProgram prog;
  prog.n_vars = 1;
  prog.objective = VectorXd::Zero(1);
  PsdBlock lo;
  lo.side = 1;
  lo.constant.emplace_back(0, 0, -1.0);
  lo.coeffs.push_back({0, 0, 0, 1.0});
  prog.blocks.push_back(std::move(lo));
  PsdBlock hi;
  hi.side = 1;
  hi.coeffs.push_back({0, 0, 0, -1.0});
  prog.blocks.push_back(std::move(hi));
  const ConicSolution sol = solve_conic(prog);
  CHECK(sol.status != SolveStatus::Optimal);
  CHECK(sol.status != SolveStatus::AlmostOptimal);
}

TEST_CASE("pinned point feasibility check") {
  // equalities fix the only variable; cone check decides the outcome
  ConicProgram prog;
  prog.n_vars = 1;
  prog.objective = VectorXd::Zero(1);
  prog.equalities = {{0, 0, 1.0}};
  prog.eq_rhs = VectorXd::Ones(1);
  PsdBlock b;
  b.side = 1;
  b.coeffs.push_back({0, 0, 0, 1.0});
  prog.blocks.push_back(std::move(b));
  CHECK(solve_conic(prog).status == SolveStatus::Optimal);

  ConicProgram bad = prog;
  bad.eq_rhs(0) = -1.0;
  CHECK(solve_conic(bad).status == SolveStatus::Infeasible);
}

TEST_CASE("gram kernels: parallel matches serial bitwise") {
  Rng rng(99);
  for (const auto& [q, side] : {std::pair{17, 9}, {64, 24}, {129, 41}}) {
    BlockOperator op;
    op.side = side;
    for (int j = 0; j < q; ++j) {
      MatrixXd g(side, side);
      for (int r = 0; r < side; ++r)
        for (int c = 0; c <= r; ++c) g(r, c) = g(c, r) = rng.uniform(-1, 1);
      op.G.push_back(std::move(g));
    }
    op.finalize();

    MatrixXd xs(side, side), ss(side, side);
    for (int r = 0; r < side; ++r)
      for (int c = 0; c <= r; ++c) {
        xs(r, c) = xs(c, r) = rng.uniform(-1, 1);
        ss(r, c) = ss(c, r) = rng.uniform(-1, 1);
      }
    const MatrixXd X = xs * xs.transpose() + MatrixXd::Identity(side, side);
    const MatrixXd Sinv = ss * ss.transpose() + MatrixXd::Identity(side, side);

    MatrixXd w_ser, w_par;
    gram_scaled_mats_serial(op, X, Sinv, w_ser);
    gram_scaled_mats_parallel(op, X, Sinv, w_par);
    CHECK((w_ser - w_par).lpNorm<Eigen::Infinity>() == 0.0);

    MatrixXd h_ser = MatrixXd::Zero(q, q), h_par = MatrixXd::Zero(q, q);
    gram_accumulate_serial(op, w_ser, h_ser);
    gram_accumulate_parallel(op, w_par, h_par);
    CHECK((h_ser - h_par).lpNorm<Eigen::Infinity>() == 0.0);

    // contraction agrees with naive per-entry traces
    const VectorXd c = gram_contract(op, X);
    for (int j = 0; j < std::min(q, 5); ++j)
      CHECK(c(j) == doctest::Approx((op.G[j] * X).trace()).epsilon(1e-12));
  }
}

TEST_CASE("serial and parallel kernel paths agree inside the solver") {
  IpmOptions serial;
  serial.parallel_kernels = false;
  IpmOptions parallel;
  parallel.parallel_kernels = true;
  const ConicSolution a = solve_conic(reference_program(), serial);
  const ConicSolution b = solve_conic(reference_program(), parallel);
  REQUIRE(a.status == SolveStatus::Optimal);
  REQUIRE(b.status == SolveStatus::Optimal);
  CHECK((a.x - b.x).lpNorm<Eigen::Infinity>() == 0.0);
}
