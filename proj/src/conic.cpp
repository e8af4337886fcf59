#include "platoon/conic.hpp"

namespace platoon {

Eigen::MatrixXd ConicProgram::block_value(int k, const Eigen::VectorXd& x) const {
  const PsdBlock& b = blocks.at(k);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(b.side, b.side);
  for (const auto& t : b.constant) {
    m(t.row, t.col) += t.value;
    if (t.row != t.col) m(t.col, t.row) += t.value;
  }
  for (const auto& c : b.coeffs) {
    const double v = c.coeff * x(c.var);
    m(c.row, c.col) += v;
    if (c.row != c.col) m(c.col, c.row) += v;
  }
  return m;
}

Eigen::VectorXd ConicProgram::equality_residual(const Eigen::VectorXd& x) const {
  Eigen::VectorXd r = -eq_rhs;
  for (const auto& e : equalities) r(e.row) += e.coeff * x(e.var);
  return r;
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::AlmostOptimal: return "almost_optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::IterationLimit: return "iteration_limit";
    case SolveStatus::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

}  // namespace platoon
