#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace platoon {

/// Coefficient of decision variable `var` at entry (row, col) of a symmetric
/// constraint block. Entries are given for row <= col and mirrored.
struct CoefEntry {
  int var;
  int row;
  int col;
  double coeff;
};

/// Constant symmetric entry of a block (row <= col, mirrored).
struct ConstEntry {
  ConstEntry(int r, int c, double v) : row(r), col(c), value(v) {}
  int row;
  int col;
  double value;
};

/// One linear matrix constraint C + sum_i x_i * A_i >= 0 (positive
/// semidefinite), with C and the A_i stored as sparse symmetric entries.
struct PsdBlock {
  std::string name;
  int side = 0;
  std::vector<ConstEntry> constant;  // row <= col
  std::vector<CoefEntry> coeffs;     // row <= col
};

/// Entry of the equality system: coefficient of variable `var` in row `row`.
struct EqEntry {
  int row;
  int var;
  double coeff;
};

/// Linear conic program: minimize objective . x subject to the equality
/// triplets and the PSD blocks. This is the whole contract a backend sees.
struct ConicProgram {
  int n_vars = 0;
  Eigen::VectorXd objective;
  std::vector<EqEntry> equalities;
  Eigen::VectorXd eq_rhs;  // size = number of equality rows
  std::vector<PsdBlock> blocks;

  int eq_rows() const { return static_cast<int>(eq_rhs.size()); }

  /// Dense value of block k at the point x.
  Eigen::MatrixXd block_value(int k, const Eigen::VectorXd& x) const;
  /// Residual vector E x - f of the equality system.
  Eigen::VectorXd equality_residual(const Eigen::VectorXd& x) const;
};

enum class SolveStatus {
  Optimal,
  AlmostOptimal,
  Infeasible,
  IterationLimit,
  NumericalFailure,
};

const char* to_string(SolveStatus s);

struct ConicSolution {
  SolveStatus status = SolveStatus::NumericalFailure;
  Eigen::VectorXd x;
  double objective = 0.0;
  double eq_residual = 0.0;    ///< max |E x - f|
  double min_block_eig = 0.0;  ///< min over blocks of the smallest eigenvalue
  double duality_gap = 0.0;
  double phase1_slack = 0.0;   ///< final uniform-slack estimate (< 0: interior found)
  int iterations = 0;
  double solve_seconds = 0.0;
  std::string message;
};

}  // namespace platoon
