#pragma once

#include <variant>
#include <vector>

#include "platoon/vehicle.hpp"

namespace platoon {

/// One platoon member: automated (accepts control) or human-driven (fixed law).
using VehicleModel = std::variant<VehicleParams, HvParams>;

inline bool is_av(const VehicleModel& v) {
  return std::holds_alternative<VehicleParams>(v);
}

/// Ordered platoon description with the desired operating point.
///
/// Vehicle 0 leads and must be automated; human-driven vehicles may sit
/// anywhere else. The desired gap h_star and speed v_star define the
/// operating point the error system is built around.
struct PlatoonSpec {
  std::vector<VehicleModel> vehicles;
  double h_star = 20.0;  ///< desired inter-vehicular gap [m]
  double v_star = 20.0;  ///< desired speed [m/s]
  double t_s = 0.05;     ///< sample time [s]

  int size() const { return static_cast<int>(vehicles.size()); }
  int av_count() const;
  int hv_count() const { return size() - av_count(); }

  /// 0-based indices of automated vehicles, in platoon order.
  std::vector<int> av_indices() const;
  /// 0-based indices of human-driven vehicles, in platoon order.
  std::vector<int> hv_indices() const;

  const VehicleParams& av_at(int i) const { return std::get<VehicleParams>(vehicles.at(i)); }
  const HvParams& hv_at(int i) const { return std::get<HvParams>(vehicles.at(i)); }

  /// Throws std::invalid_argument on an empty platoon, a human-driven
  /// leader, or invalid member parameters.
  void validate() const;
};

}  // namespace platoon
