#pragma once

#include <stdexcept>

namespace platoon {

/// Longitudinal parameters of one automated vehicle.
struct VehicleParams {
  double tau;    ///< engine time constant [s]
  double sigma;  ///< specific air mass [N/m^3]
  double M;      ///< cross-sectional area [m^2]
  double c;      ///< drag coefficient [-]
  double d;      ///< mechanical drag [N]
  double m;      ///< mass [kg]

  void validate() const;
};

/// Car-following parameters of one human-driven vehicle.
struct HvParams {
  double alpha;  ///< headway gain [1/s]
  double beta;   ///< relative-velocity gain [1/s]
  double tau;    ///< driver-vehicle lag [s]
  double h_s;    ///< standstill gap [m]
  double h_g;    ///< free-flow gap [m]
  double v_max;  ///< maximum desired speed [m/s]

  void validate() const;
};

/// Absolute longitudinal state of one vehicle.
struct VehicleState {
  double p = 0.0;  ///< position [m]
  double v = 0.0;  ///< velocity [m/s]
  double a = 0.0;  ///< acceleration [m/s^2]
};

/// State of one vehicle expressed about the desired operating point.
struct ErrorState {
  double h_err = 0.0;  ///< spacing error [m]
  double v_err = 0.0;  ///< velocity error [m/s]
  double a = 0.0;      ///< acceleration [m/s^2]
};

/// Lumped air-resistance coefficient sigma*M*c/(2*m) [1/m].
double air_resistance(const VehicleParams& params);

/// Time derivative (dp, dv, da) of an automated vehicle under engine effort u [N].
VehicleState av_derivative(const VehicleState& state, const VehicleParams& params,
                           double u);

/// Spacing-dependent desired velocity of a human driver (clipped cosine blend).
double range_policy(double h, const HvParams& params);

/// Time derivative (dh, dv, da) of a human-driven vehicle following `pred`.
/// The gap h is taken as pred.p - state.p.
VehicleState hv_derivative(const VehicleState& state, const VehicleState& pred,
                           const HvParams& params);

/// Engine effort that holds an AV in steady cruise at speed v (zero jerk, a = 0).
double av_cruise_effort(double v, const VehicleParams& params);

}  // namespace platoon
