#pragma once

#include "platoon/controllers.hpp"
#include "platoon/lifted_system.hpp"

namespace platoon {

/// Gain and lifting of one sub-platoon, plus where its AVs sit globally.
struct SubGain {
  int begin = 0;            ///< first global vehicle index
  int end = 0;              ///< one past the last global vehicle index
  Eigen::MatrixXd K;        ///< n_u_sub x n_z_sub
  LiftingLayout layout;     ///< sub-platoon lifting
  std::vector<int> u_slots; ///< global AV ordinal of each sub AV, sub order
};

/// Deployable controller: one gain per sub-platoon over a consecutive
/// partition of the platoon.
struct ControllerBundle {
  std::vector<SubGain> subs;
  double t_s = 0.0;
  int n_vehicles = 0;
  int n_av = 0;

  void validate() const;
};

/// u = K Z(x) per sub-platoon, assembled into the global per-AV effort
/// vector. Each sub-platoon sees only its own state slice. Throws
/// SimulationDiverged on a non-finite state (controller fault).
Eigen::VectorXd cacc_control(const ControllerBundle& bundle, const Eigen::VectorXd& x_err);

/// Sampled-data adapter around cacc_control.
class CaccController : public Controller {
 public:
  explicit CaccController(ControllerBundle bundle) : bundle_(std::move(bundle)) {
    bundle_.validate();
  }
  Eigen::VectorXd control(int, const Eigen::VectorXd& x_err) override;

 private:
  ControllerBundle bundle_;
};

}  // namespace platoon
