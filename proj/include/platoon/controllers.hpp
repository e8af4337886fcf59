#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "platoon/lifted_system.hpp"
#include "platoon/rng.hpp"

namespace platoon {

/// Sampled-data state-feedback controller. `control` is invoked once per
/// sample instant with the stacked platoon error state and returns one engine
/// effort per automated vehicle (layout order); the simulator holds the value
/// until the next sample.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual Eigen::VectorXd control(int step, const Eigen::VectorXd& x_err) = 0;
  /// Restores the initial internal state (e.g. reseeds excitation noise).
  virtual void reset() {}
};

struct AccGains {
  double k_p = 0.23;
  double k_v = 0.74;
};

/// Commanded acceleration of the classic constant-gap PD follower law.
inline double acc_commanded_accel(double h_err, double rel_speed, const AccGains& g) {
  return g.k_p * h_err + g.k_v * rel_speed;
}

/// Classic per-vehicle ACC: each AV tracks its predecessor with a PD law on
/// spacing error and relative speed, converted to engine effort through the
/// nominal mass. Optional zero-mean uniform excitation (in commanded-accel
/// units, m/s^2) keeps recorded data rich; it is seeded and reproducible.
class AccController : public Controller {
 public:
  AccController(const LiftingLayout& layout, AccGains gains,
                std::vector<double> nominal_masses, double dither_accel_amplitude,
                std::uint64_t seed);

  Eigen::VectorXd control(int step, const Eigen::VectorXd& x_err) override;
  void reset() override { rng_ = Rng(seed_); }

 private:
  LiftingLayout layout_;
  AccGains gains_;
  std::vector<double> masses_;  // one per AV, layout order
  double dither_;
  std::uint64_t seed_;
  Rng rng_;
};

/// Runs `before` for steps < switch_step, then `after`.
class ScheduledController : public Controller {
 public:
  ScheduledController(std::shared_ptr<Controller> before, std::shared_ptr<Controller> after,
                      int switch_step)
      : before_(std::move(before)), after_(std::move(after)), switch_step_(switch_step) {}

  Eigen::VectorXd control(int step, const Eigen::VectorXd& x_err) override {
    return step < switch_step_ ? before_->control(step, x_err)
                               : after_->control(step, x_err);
  }
  void reset() override {
    before_->reset();
    after_->reset();
  }

 private:
  std::shared_ptr<Controller> before_;
  std::shared_ptr<Controller> after_;
  int switch_step_;
};

/// Constant per-AV efforts (open-loop hold; used for equilibrium checks).
class ConstantController : public Controller {
 public:
  explicit ConstantController(Eigen::VectorXd u) : u_(std::move(u)) {}
  Eigen::VectorXd control(int, const Eigen::VectorXd&) override { return u_; }

 private:
  Eigen::VectorXd u_;
};

}  // namespace platoon
