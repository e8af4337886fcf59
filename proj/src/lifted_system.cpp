#include "platoon/lifted_system.hpp"

namespace platoon {

AvErrorBlocks build_av_error_blocks(const VehicleParams& params, double v_star) {
  params.validate();
  const double R = air_resistance(params);
  const double tau = params.tau;

  AvErrorBlocks b;
  b.A << 0.0, -1.0, 0.0,
         0.0, 0.0, 1.0,
         0.0, -2.0 * R * v_star / tau, -(1.0 + 2.0 * tau * R * v_star) / tau;
  b.C = Eigen::Matrix3d::Zero();
  b.C(0, 1) = 1.0;
  b.E << 0.0, 0.0,
         0.0, 0.0,
         -2.0 * R, -R / tau;
  b.B << 0.0, 0.0, 1.0 / (tau * params.m);
  b.D << 0.0, 0.0, 1.0;
  return b;
}

HvErrorBlocks build_hv_error_blocks(const HvParams& params) {
  params.validate();
  HvErrorBlocks b;
  b.A << 0.0, -1.0, 0.0,
         0.0, 0.0, 1.0,
         0.0, -(params.alpha + params.beta) / params.tau, -1.0 / params.tau;
  b.C = Eigen::Matrix3d::Zero();
  b.C(0, 1) = 1.0;
  b.C(2, 1) = params.beta / params.tau;
  b.D << 0.0, 0.0, 1.0;
  return b;
}

LiftingLayout make_layout(const PlatoonSpec& spec) {
  LiftingLayout layout;
  layout.n = spec.size();
  layout.n_x = 3 * layout.n;
  layout.av_indices = spec.av_indices();
  layout.n_u = static_cast<int>(layout.av_indices.size());
  layout.n_w = layout.n;
  layout.n_z = layout.n_x + 2 * layout.n_u;
  layout.monomial_offset.assign(layout.n, -1);
  int off = layout.n_x;
  for (int i : layout.av_indices) {
    layout.monomial_offset[i] = off;
    off += 2;
  }
  return layout;
}

LiftedSystem assemble_polynomial_system(const PlatoonSpec& spec) {
  spec.validate();
  LiftedSystem sys;
  sys.layout = make_layout(spec);
  const LiftingLayout& L = sys.layout;

  sys.A_c = Eigen::MatrixXd::Zero(L.n_x, L.n_z);
  sys.B_c = Eigen::MatrixXd::Zero(L.n_x, L.n_u);
  sys.D_c = Eigen::MatrixXd::Zero(L.n_x, L.n_w);

  int u_col = 0;
  for (int i = 0; i < L.n; ++i) {
    const int r = L.state_offset(i);
    if (is_av(spec.vehicles[i])) {
      const AvErrorBlocks b = build_av_error_blocks(spec.av_at(i), spec.v_star);
      sys.A_c.block<3, 3>(r, r) = b.A;
      if (i > 0) sys.A_c.block<3, 3>(r, r - 3) = b.C;
      sys.A_c.block<3, 2>(r, L.monomial_offset[i]) = b.E;
      sys.B_c.block<3, 1>(r, u_col) = b.B;
      sys.D_c.block<3, 1>(r, i) = b.D;
      ++u_col;
    } else {
      const HvErrorBlocks b = build_hv_error_blocks(spec.hv_at(i));
      sys.A_c.block<3, 3>(r, r) = b.A;
      if (i > 0) sys.A_c.block<3, 3>(r, r - 3) = b.C;
      sys.D_c.block<3, 1>(r, i) = b.D;
    }
  }
  return sys;
}

LiftedSystem discretize(LiftedSystem sys, double t_s) {
  if (t_s <= 0.0) throw std::invalid_argument("discretize: t_s must be positive");
  const LiftingLayout& L = sys.layout;
  Eigen::MatrixXd ident_pad = Eigen::MatrixXd::Zero(L.n_x, L.n_z);
  ident_pad.leftCols(L.n_x) = Eigen::MatrixXd::Identity(L.n_x, L.n_x);
  sys.A = ident_pad + t_s * sys.A_c;
  sys.B = t_s * sys.B_c;
  sys.D = t_s * sys.D_c;
  sys.t_s = t_s;
  return sys;
}

Eigen::VectorXd lift(const Eigen::VectorXd& x, const LiftingLayout& layout) {
  if (x.size() != layout.n_x)
    throw std::invalid_argument("lift: state dimension mismatch");
  Eigen::VectorXd z(layout.n_z);
  z.head(layout.n_x) = x;
  for (int i : layout.av_indices) {
    const double v_err = x(layout.state_offset(i) + 1);
    const double a = x(layout.state_offset(i) + 2);
    z(layout.monomial_offset[i]) = v_err * a;
    z(layout.monomial_offset[i] + 1) = v_err * v_err;
  }
  return z;
}

}  // namespace platoon
