#include "platoon/reference_profile.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace platoon {

ReferenceProfile::ReferenceProfile(std::vector<double> times, std::vector<double> speeds,
                                   Interp mode)
    : times_(std::move(times)), speeds_(std::move(speeds)), mode_(mode) {
  if (times_.size() != speeds_.size() || times_.empty())
    throw std::invalid_argument("ReferenceProfile: need equally many times and speeds");
  for (size_t i = 0; i + 1 < times_.size(); ++i)
    if (times_[i + 1] <= times_[i])
      throw std::invalid_argument("ReferenceProfile: times must be strictly increasing");
  for (double s : speeds_)
    if (s < 0.0 || !std::isfinite(s))
      throw std::invalid_argument("ReferenceProfile: speeds must be finite and nonnegative");
  build_integral();
}

ReferenceProfile ReferenceProfile::constant(double speed, double duration) {
  return ReferenceProfile({0.0, duration}, {speed, speed}, Interp::Zoh);
}

ReferenceProfile ReferenceProfile::with_hold(double hold_speed, double hold_duration) const {
  if (hold_duration <= 0.0)
    throw std::invalid_argument("with_hold: hold duration must be positive");
  const double joint = hold_duration + times_.front();
  std::vector<double> t, v;
  t.push_back(0.0);
  v.push_back(hold_speed);
  // keep the hold flat up to just before the joint, then hand over to the cycle
  const double flat_end = joint - 1e-3;
  if (flat_end > 0.0) {
    t.push_back(flat_end);
    v.push_back(hold_speed);
  }
  for (size_t i = 0; i < times_.size(); ++i) {
    t.push_back(times_[i] + hold_duration);
    v.push_back(speeds_[i]);
  }
  return ReferenceProfile(std::move(t), std::move(v), mode_);
}

void ReferenceProfile::build_integral() {
  cum_dist_.assign(times_.size(), 0.0);
  for (size_t i = 0; i + 1 < times_.size(); ++i) {
    const double dt = times_[i + 1] - times_[i];
    const double seg = mode_ == Interp::Zoh
                           ? speeds_[i] * dt
                           : 0.5 * (speeds_[i] + speeds_[i + 1]) * dt;
    cum_dist_[i + 1] = cum_dist_[i] + seg;
  }
}

double ReferenceProfile::speed_at(double t) const {
  if (t <= times_.front()) return speeds_.front();
  if (t >= times_.back()) return speeds_.back();
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const size_t i = static_cast<size_t>(it - times_.begin()) - 1;
  if (mode_ == Interp::Zoh) return speeds_[i];
  const double w = (t - times_[i]) / (times_[i + 1] - times_[i]);
  return (1.0 - w) * speeds_[i] + w * speeds_[i + 1];
}

double ReferenceProfile::distance_at(double t) const {
  if (t < times_.front() - 1e-9 || t > times_.back() + 1e-9)
    throw std::out_of_range("ReferenceProfile: time outside profile range");
  t = std::clamp(t, times_.front(), times_.back());
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  size_t i = static_cast<size_t>(it - times_.begin());
  if (i > 0) --i;
  if (i + 1 >= times_.size()) return cum_dist_.back();
  const double dt = t - times_[i];
  if (mode_ == Interp::Zoh) return cum_dist_[i] + speeds_[i] * dt;
  const double v_t = speed_at(t);
  return cum_dist_[i] + 0.5 * (speeds_[i] + v_t) * dt;
}

double ReferenceProfile::max_speed() const {
  return *std::max_element(speeds_.begin(), speeds_.end());
}

bool ReferenceProfile::constant_over(double t0, double t1, double tol) const {
  const double v0 = speed_at(t0);
  if (std::abs(speed_at(t1) - v0) > tol) return false;
  for (size_t i = 0; i < times_.size(); ++i)
    if (times_[i] > t0 && times_[i] < t1 && std::abs(speeds_[i] - v0) > tol)
      return false;
  return true;
}

ReferenceProfile load_drive_cycle(const std::string& path, double speed_scale,
                                  ReferenceProfile::Interp mode) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_drive_cycle: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("load_drive_cycle: empty file " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "time_s,speed_mps")
    throw std::runtime_error("load_drive_cycle: expected header 'time_s,speed_mps' in " + path);

  std::vector<double> t, v;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    double ti, vi;
    char comma;
    if (!(ss >> ti >> comma >> vi) || comma != ',')
      throw std::runtime_error("load_drive_cycle: malformed row at line " +
                               std::to_string(lineno) + " of " + path);
    if (!t.empty() && ti <= t.back())
      throw std::runtime_error("load_drive_cycle: non-monotonic time at line " +
                               std::to_string(lineno) + " of " + path);
    t.push_back(ti);
    v.push_back(vi * speed_scale);
  }
  if (t.size() < 2) throw std::runtime_error("load_drive_cycle: need at least two rows");
  return ReferenceProfile(std::move(t), std::move(v), mode);
}

double virtual_leader_position(const ReferenceProfile& profile, double t) {
  return profile.distance_at(t);
}

}  // namespace platoon
