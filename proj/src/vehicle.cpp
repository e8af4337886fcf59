#include "platoon/vehicle.hpp"

#include <cmath>

namespace platoon {

namespace {
void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}
}  // namespace

void VehicleParams::validate() const {
  require(tau > 0.0, "VehicleParams: tau must be positive");
  require(sigma > 0.0, "VehicleParams: sigma must be positive");
  require(M > 0.0, "VehicleParams: M must be positive");
  require(c > 0.0, "VehicleParams: c must be positive");
  require(d > 0.0, "VehicleParams: d must be positive");
  require(m > 0.0, "VehicleParams: m must be positive");
}

void HvParams::validate() const {
  require(alpha > 0.0, "HvParams: alpha must be positive");
  require(beta > 0.0, "HvParams: beta must be positive");
  require(tau > 0.0, "HvParams: tau must be positive");
  require(h_s > 0.0, "HvParams: h_s must be positive");
  require(h_g > h_s, "HvParams: h_g must exceed h_s");
  require(v_max > 0.0, "HvParams: v_max must be positive");
}

double air_resistance(const VehicleParams& params) {
  return params.sigma * params.M * params.c / (2.0 * params.m);
}

VehicleState av_derivative(const VehicleState& state, const VehicleParams& params,
                           double u) {
  const double R = air_resistance(params);
  const double f = -(state.a + R * state.v * state.v + params.d / params.m) / params.tau -
                   2.0 * R * state.v * state.a;
  return {state.v, state.a, f + u / (params.tau * params.m)};
}

double range_policy(double h, const HvParams& params) {
  if (h <= params.h_s) return 0.0;
  if (h >= params.h_g) return params.v_max;
  const double phase = M_PI * (h - params.h_s) / (params.h_g - params.h_s);
  return 0.5 * params.v_max * (1.0 - std::cos(phase));
}

VehicleState hv_derivative(const VehicleState& state, const VehicleState& pred,
                           const HvParams& params) {
  const double h = pred.p - state.p;
  const double jerk = (params.alpha * (range_policy(h, params) - state.v) +
                       params.beta * (pred.v - state.v) - state.a) /
                      params.tau;
  return {pred.v - state.v, state.a, jerk};
}

double av_cruise_effort(double v, const VehicleParams& params) {
  const double R = air_resistance(params);
  return params.m * R * v * v + params.d;
}

}  // namespace platoon
