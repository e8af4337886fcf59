#pragma once

#include <Eigen/Dense>
#include <vector>

#include "platoon/platoon_spec.hpp"

namespace platoon {

/// Per-vehicle error-system blocks of one automated vehicle:
/// dx_i = A x_i + C x_{i-1} + E q_i + B u_i + D w_i with q_i = (v_err*a, v_err^2).
struct AvErrorBlocks {
  Eigen::Matrix3d A;
  Eigen::Matrix3d C;
  Eigen::Matrix<double, 3, 2> E;
  Eigen::Vector3d B;
  Eigen::Vector3d D;
};

/// Per-vehicle error-system blocks of one human-driven vehicle (no control
/// input and no lifted monomials).
struct HvErrorBlocks {
  Eigen::Matrix3d A;
  Eigen::Matrix3d C;
  Eigen::Vector3d D;
};

AvErrorBlocks build_av_error_blocks(const VehicleParams& params, double v_star);
HvErrorBlocks build_hv_error_blocks(const HvParams& params);

/// Where each vehicle's pieces live inside the stacked state x and the
/// lifted vector Z = [x; Q]. Only automated vehicles own a monomial slice.
struct LiftingLayout {
  int n = 0;    ///< vehicles
  int n_x = 0;  ///< stacked state dimension (3n)
  int n_u = 0;  ///< control inputs (one per AV)
  int n_w = 0;  ///< disturbance channels (one per vehicle)
  int n_z = 0;  ///< lifted dimension n_x + 2 * (#AV)
  std::vector<int> av_indices;          ///< AV vehicle indices, platoon order
  std::vector<int> monomial_offset;     ///< per vehicle: offset of its 2-entry
                                        ///< monomial slice inside Z, or -1 for HVs
  int state_offset(int vehicle) const { return 3 * vehicle; }
};

LiftingLayout make_layout(const PlatoonSpec& spec);

/// Stacked platooning error system, linear in the lifted vector Z(x):
///   continuous  dx = A_c Z(x) + B_c u + D_c w
///   discrete    x+ = A Z(x) + B u + D w   (forward Euler at t_s)
struct LiftedSystem {
  Eigen::MatrixXd A_c, B_c, D_c;
  Eigen::MatrixXd A, B, D;  // empty until discretized
  LiftingLayout layout;
  double t_s = 0.0;  // 0 while only the continuous part exists

  bool discretized() const { return t_s > 0.0; }
};

/// Builds the continuous block matrices for the given platoon. The leader's
/// predecessor coupling is dropped (its predecessor error is identically zero).
LiftedSystem assemble_polynomial_system(const PlatoonSpec& spec);

/// Fills the forward-Euler discrete matrices: A = [I 0] + t_s*A_c, B = t_s*B_c,
/// D = t_s*D_c.
LiftedSystem discretize(LiftedSystem sys, double t_s);

/// Z(x) = [x; Q(x)] with Q stacking (v_err*a, v_err^2) for each AV in layout
/// order. Throws on dimension mismatch.
Eigen::VectorXd lift(const Eigen::VectorXd& x, const LiftingLayout& layout);

}  // namespace platoon
