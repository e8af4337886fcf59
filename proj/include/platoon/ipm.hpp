#pragma once

#include "platoon/conic.hpp"

namespace platoon {

struct IpmOptions {
  int max_iterations = 900;    ///< Newton-step budget for path following
  int phase1_iterations = 8000;  ///< splitting-iteration budget for phase I
  double tol_gap = 1e-8;       ///< relative duality-gap target
  double t_factor = 10.0;      ///< path-following multiplier between stages
  bool parallel_kernels = true;
  bool verbose = false;
  Eigen::VectorXd x_init;  ///< optional warm-start candidate (full variables)
};

/// Native conic backend: two-phase path-following on the log-det barrier with
/// damped Newton centering. Iterates stay strictly inside the cones, so the
/// returned point's blocks are positive semidefinite up to roundoff.
/// Equalities are eliminated through an orthonormal null-space basis and hold
/// to machine precision; inconsistent systems and phase-I failures are
/// reported as infeasible.
ConicSolution solve_conic(const ConicProgram& program, const IpmOptions& opts = {});

}  // namespace platoon
