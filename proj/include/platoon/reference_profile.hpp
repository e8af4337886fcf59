#pragma once

#include <string>
#include <vector>

namespace platoon {

/// Time-stamped reference speed samples with a chosen interpolation mode.
///
/// The integral of the interpolated speed doubles as the virtual-leader
/// displacement the leading vehicle's spacing error is measured against.
class ReferenceProfile {
 public:
  enum class Interp { Zoh, Linear };

  ReferenceProfile() = default;
  ReferenceProfile(std::vector<double> times, std::vector<double> speeds,
                   Interp mode = Interp::Linear);

  /// Constant profile of the given duration.
  static ReferenceProfile constant(double speed, double duration);

  /// New profile equal to `hold_speed` on [0, hold_duration) followed by this
  /// profile shifted right by hold_duration.
  ReferenceProfile with_hold(double hold_speed, double hold_duration) const;

  double speed_at(double t) const;
  /// Integral of the interpolated speed over [0, t]; throws outside [0, end].
  double distance_at(double t) const;
  double end_time() const { return times_.empty() ? 0.0 : times_.back(); }
  double max_speed() const;
  bool constant_over(double t0, double t1, double tol = 1e-12) const;
  Interp interp() const { return mode_; }
  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& speeds() const { return speeds_; }

 private:
  std::vector<double> times_;
  std::vector<double> speeds_;
  std::vector<double> cum_dist_;  // integral up to each sample
  Interp mode_ = Interp::Linear;

  void build_integral();
};

/// Reads a drive-cycle CSV with header `time_s,speed_mps`. `speed_scale`
/// converts other units to m/s (e.g. 1/3.6 for km/h columns). Malformed rows
/// and non-increasing timestamps raise std::runtime_error with the line number.
ReferenceProfile load_drive_cycle(const std::string& path, double speed_scale = 1.0,
                                  ReferenceProfile::Interp mode = ReferenceProfile::Interp::Linear);

/// Position of the virtual leader at time t relative to its start, i.e. the
/// trapezoidal integral of the profile speed from 0 to t.
double virtual_leader_position(const ReferenceProfile& profile, double t);

}  // namespace platoon
