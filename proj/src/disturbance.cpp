#include "platoon/disturbance.hpp"

#include <algorithm>
#include <cmath>

namespace platoon {

ParamBox ParamBox::relative(const PlatoonSpec& spec, double fraction) {
  return relative(spec, fraction, fraction);
}

ParamBox ParamBox::relative(const PlatoonSpec& spec, double av_fraction,
                            double hv_fraction) {
  if (av_fraction < 0.0 || av_fraction >= 1.0 || hv_fraction < 0.0 || hv_fraction >= 1.0)
    throw std::invalid_argument("ParamBox::relative: fraction must be in [0, 1)");
  ParamBox box;
  for (const auto& v : spec.vehicles) {
    if (is_av(v)) {
      const double f = av_fraction;
      const auto& p = std::get<VehicleParams>(v);
      VehicleParamBounds b;
      b.lo = {p.tau * (1 - f), p.sigma * (1 - f), p.M * (1 - f),
              p.c * (1 - f),   p.d * (1 - f),     p.m * (1 - f)};
      b.hi = {p.tau * (1 + f), p.sigma * (1 + f), p.M * (1 + f),
              p.c * (1 + f),   p.d * (1 + f),     p.m * (1 + f)};
      box.bounds.emplace_back(b);
    } else {
      const double f = hv_fraction;
      const auto& p = std::get<HvParams>(v);
      HvParamBounds b;
      b.lo = {p.alpha * (1 - f), p.beta * (1 - f), p.tau * (1 - f), p.h_s, p.h_g, p.v_max};
      b.hi = {p.alpha * (1 + f), p.beta * (1 + f), p.tau * (1 + f), p.h_s, p.h_g, p.v_max};
      box.bounds.emplace_back(b);
    }
  }
  return box;
}

namespace {
void check_interval(double lo, double nom, double hi, const char* what) {
  if (!(lo > 0.0) || lo > nom || nom > hi)
    throw std::invalid_argument(std::string("ParamBox: bad interval for ") + what);
}
}  // namespace

void ParamBox::validate(const PlatoonSpec& spec) const {
  if (static_cast<int>(bounds.size()) != spec.size())
    throw std::invalid_argument("ParamBox: size mismatch with platoon");
  for (int i = 0; i < spec.size(); ++i) {
    if (is_av(spec.vehicles[i])) {
      const auto& b = std::get<VehicleParamBounds>(bounds[i]);
      const auto& p = spec.av_at(i);
      check_interval(b.lo.tau, p.tau, b.hi.tau, "tau");
      check_interval(b.lo.sigma, p.sigma, b.hi.sigma, "sigma");
      check_interval(b.lo.M, p.M, b.hi.M, "M");
      check_interval(b.lo.c, p.c, b.hi.c, "c");
      check_interval(b.lo.d, p.d, b.hi.d, "d");
      check_interval(b.lo.m, p.m, b.hi.m, "m");
    } else {
      const auto& b = std::get<HvParamBounds>(bounds[i]);
      const auto& p = spec.hv_at(i);
      check_interval(b.lo.alpha, p.alpha, b.hi.alpha, "alpha");
      check_interval(b.lo.beta, p.beta, b.hi.beta, "beta");
      check_interval(b.lo.tau, p.tau, b.hi.tau, "tau");
    }
  }
}

DisturbanceBound disturbance_bound(const ParamBox& boxes, const PlatoonSpec& spec) {
  if (spec.vehicles.empty())
    throw std::invalid_argument("disturbance_bound: empty platoon");
  boxes.validate(spec);
  DisturbanceBound out;
  out.per_vehicle.reserve(spec.size());
  for (int i = 0; i < spec.size(); ++i) {
    double delta_i = 0.0;
    if (is_av(spec.vehicles[i])) {
      const auto& b = std::get<VehicleParamBounds>(boxes.bounds[i]);
      // Interval maximum of R = sigma*M*c/(2m): numerator up, mass down.
      const double R_hi = b.hi.sigma * b.hi.M * b.hi.c / (2.0 * b.lo.m);
      delta_i = (b.hi.m * R_hi * spec.v_star * spec.v_star + b.hi.d) /
                (b.lo.tau * b.lo.m);
    } else {
      const auto& b = std::get<HvParamBounds>(boxes.bounds[i]);
      const double span = std::max(spec.v_star, b.hi.v_max - spec.v_star);
      delta_i = b.hi.alpha * span / b.lo.tau;
    }
    out.per_vehicle.push_back(delta_i);
    out.delta = std::max(out.delta, delta_i);
  }
  return out;
}

double true_disturbance(const PlatoonSpec& spec, int i, double h_err) {
  const auto& v = spec.vehicles.at(i);
  if (is_av(v)) {
    const auto& p = std::get<VehicleParams>(v);
    const double R = air_resistance(p);
    return -(p.m * R * spec.v_star * spec.v_star + p.d) / (p.tau * p.m);
  }
  const auto& p = std::get<HvParams>(v);
  return p.alpha * (range_policy(h_err + spec.h_star, p) - spec.v_star) / p.tau;
}

}  // namespace platoon
