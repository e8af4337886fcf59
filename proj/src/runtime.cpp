#include "platoon/runtime.hpp"

#include <cmath>

#include "platoon/simulate.hpp"

namespace platoon {

void ControllerBundle::validate() const {
  if (subs.empty()) throw std::invalid_argument("ControllerBundle: no sub-platoons");
  if (t_s <= 0.0) throw std::invalid_argument("ControllerBundle: t_s must be positive");
  int expected_begin = 0;
  int av_seen = 0;
  for (const auto& s : subs) {
    if (s.begin != expected_begin)
      throw std::invalid_argument("ControllerBundle: sub-platoons must partition the platoon");
    if (s.end <= s.begin) throw std::invalid_argument("ControllerBundle: empty sub-platoon");
    if (s.K.rows() != s.layout.n_u || s.K.cols() != s.layout.n_z)
      throw std::invalid_argument("ControllerBundle: gain dimensions mismatch the lifting");
    if (static_cast<int>(s.u_slots.size()) != s.layout.n_u)
      throw std::invalid_argument("ControllerBundle: one output slot per AV required");
    expected_begin = s.end;
    av_seen += s.layout.n_u;
  }
  if (expected_begin != n_vehicles || av_seen != n_av)
    throw std::invalid_argument("ControllerBundle: partition does not cover the platoon");
}

Eigen::VectorXd cacc_control(const ControllerBundle& bundle, const Eigen::VectorXd& x_err) {
  if (x_err.size() != 3 * bundle.n_vehicles)
    throw std::invalid_argument("cacc_control: state dimension mismatch");
  if (!x_err.allFinite())
    throw SimulationDiverged("cacc_control: non-finite platoon state");
  Eigen::VectorXd u = Eigen::VectorXd::Zero(bundle.n_av);
  for (const auto& s : bundle.subs) {
    const Eigen::VectorXd x_sub = x_err.segment(3 * s.begin, 3 * (s.end - s.begin));
    const Eigen::VectorXd u_sub = s.K * lift(x_sub, s.layout);
    for (int j = 0; j < s.layout.n_u; ++j) u(s.u_slots[j]) = u_sub(j);
  }
  return u;
}

Eigen::VectorXd CaccController::control(int, const Eigen::VectorXd& x_err) {
  return cacc_control(bundle_, x_err);
}

}  // namespace platoon
