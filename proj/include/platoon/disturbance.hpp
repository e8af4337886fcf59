#pragma once

#include <vector>

#include "platoon/platoon_spec.hpp"

namespace platoon {

/// Elementwise interval [lo, hi] around one AV's parameters.
struct VehicleParamBounds {
  VehicleParams lo;
  VehicleParams hi;
};

/// Elementwise interval around one HV's parameters.
struct HvParamBounds {
  HvParams lo;
  HvParams hi;
};

using ModelBounds = std::variant<VehicleParamBounds, HvParamBounds>;

/// Per-vehicle parameter boxes, aligned with a PlatoonSpec's vehicle list.
struct ParamBox {
  std::vector<ModelBounds> bounds;

  /// Symmetric box of +/- `fraction` around every parameter of every vehicle.
  /// The HV behavioural gains/lag get their own (possibly zero) half-width.
  static ParamBox relative(const PlatoonSpec& spec, double fraction);
  static ParamBox relative(const PlatoonSpec& spec, double av_fraction, double hv_fraction);

  /// Throws unless lo <= nominal <= hi elementwise and lo stays positive.
  void validate(const PlatoonSpec& spec) const;
};

struct DisturbanceBound {
  double delta = 0.0;               ///< max over vehicles
  std::vector<double> per_vehicle;  ///< delta_i, platoon order
};

/// Worst-case bound on each vehicle's unknown disturbance channel, evaluated
/// by interval arithmetic over the parameter box. HV bounds read the paper's
/// free symbol as the desired speed and use the lag's lower bound.
DisturbanceBound disturbance_bound(const ParamBox& boxes, const PlatoonSpec& spec);

/// Ground-truth disturbance acting on vehicle `i` of the spec. Constant for
/// AVs; gap-dependent for HVs (gap = h_err + h_star).
double true_disturbance(const PlatoonSpec& spec, int i, double h_err);

}  // namespace platoon
