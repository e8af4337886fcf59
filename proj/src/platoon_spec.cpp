#include "platoon/platoon_spec.hpp"

namespace platoon {

int PlatoonSpec::av_count() const {
  int n = 0;
  for (const auto& v : vehicles)
    if (is_av(v)) ++n;
  return n;
}

std::vector<int> PlatoonSpec::av_indices() const {
  std::vector<int> idx;
  for (int i = 0; i < size(); ++i)
    if (is_av(vehicles[i])) idx.push_back(i);
  return idx;
}

std::vector<int> PlatoonSpec::hv_indices() const {
  std::vector<int> idx;
  for (int i = 0; i < size(); ++i)
    if (!is_av(vehicles[i])) idx.push_back(i);
  return idx;
}

void PlatoonSpec::validate() const {
  if (vehicles.empty()) throw std::invalid_argument("PlatoonSpec: platoon is empty");
  if (!is_av(vehicles.front()))
    throw std::invalid_argument("PlatoonSpec: leader must be an automated vehicle");
  if (h_star <= 0.0) throw std::invalid_argument("PlatoonSpec: h_star must be positive");
  if (v_star <= 0.0) throw std::invalid_argument("PlatoonSpec: v_star must be positive");
  if (t_s <= 0.0) throw std::invalid_argument("PlatoonSpec: t_s must be positive");
  for (const auto& v : vehicles) {
    if (is_av(v))
      std::get<VehicleParams>(v).validate();
    else
      std::get<HvParams>(v).validate();
  }
}

}  // namespace platoon
