#include "platoon/controllers.hpp"

namespace platoon {

AccController::AccController(const LiftingLayout& layout, AccGains gains,
                             std::vector<double> nominal_masses, double dither_amplitude,
                             std::uint64_t seed)
    : layout_(layout),
      gains_(gains),
      masses_(std::move(nominal_masses)),
      dither_(dither_amplitude),
      seed_(seed),
      rng_(seed) {
  if (static_cast<int>(masses_.size()) != layout_.n_u)
    throw std::invalid_argument("AccController: one nominal mass per AV required");
}

Eigen::VectorXd AccController::control(int /*step*/, const Eigen::VectorXd& x_err) {
  if (x_err.size() != layout_.n_x)
    throw std::invalid_argument("AccController: state dimension mismatch");
  Eigen::VectorXd u(layout_.n_u);
  for (int j = 0; j < layout_.n_u; ++j) {
    const int i = layout_.av_indices[j];
    const double h_err = x_err(layout_.state_offset(i));
    const double v_err = x_err(layout_.state_offset(i) + 1);
    // predecessor velocity error; the virtual leader tracks the reference
    const double v_err_pred = i == 0 ? 0.0 : x_err(layout_.state_offset(i - 1) + 1);
    double a_cmd = acc_commanded_accel(h_err, v_err_pred - v_err, gains_);
    if (dither_ > 0.0) a_cmd += rng_.uniform(-dither_, dither_);
    u(j) = masses_[j] * a_cmd;
  }
  return u;
}

}  // namespace platoon
