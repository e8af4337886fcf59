#include "platoon/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace platoon {

MetricsReport compute_metrics(const Trajectory& traj, const PlatoonSpec& spec,
                              double window_start, double window_end) {
  const int n = spec.size();
  MetricsReport m;
  m.window_start = window_start;
  m.window_end = window_end;
  m.rms_velocity_dev.assign(n, 0.0);
  m.rms_gap_error.assign(n, 0.0);
  m.min_gap = std::numeric_limits<double>::infinity();
  int count = 0;
  for (int k = 0; k < traj.sample_count(); ++k) {
    const double t = traj.times[k];
    if (t < window_start - 1e-9 || t > window_end + 1e-9) continue;
    ++count;
    for (int i = 0; i < n; ++i) {
      const VehicleSample& s = traj.steps[k][i];
      m.rms_velocity_dev[i] += s.v_err * s.v_err;
      m.rms_gap_error[i] += s.h_err * s.h_err;
      if (i > 0) m.min_gap = std::min(m.min_gap, s.h_err + spec.h_star);
      m.max_abs_effort = std::max(m.max_abs_effort, std::abs(s.u));
    }
  }
  if (count == 0) throw std::invalid_argument("compute_metrics: empty window");
  for (int i = 0; i < n; ++i) {
    m.rms_velocity_dev[i] = std::sqrt(m.rms_velocity_dev[i] / count);
    m.rms_gap_error[i] = std::sqrt(m.rms_gap_error[i] / count);
  }
  if (n == 1) m.min_gap = spec.h_star;  // no physical follower gap exists
  return m;
}

void write_metrics_csv(const MetricsReport& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_metrics_csv: cannot open " + path);
  out << "metric,index,value\n";
  char buf[128];
  const auto row = [&](const char* name, int idx, double v) {
    std::snprintf(buf, sizeof(buf), "%s,%d,%.17g\n", name, idx, v);
    out << buf;
  };
  for (size_t i = 0; i < m.rms_velocity_dev.size(); ++i)
    row("rms_velocity_dev", static_cast<int>(i + 1), m.rms_velocity_dev[i]);
  for (size_t i = 0; i < m.rms_gap_error.size(); ++i)
    row("rms_gap_error", static_cast<int>(i + 1), m.rms_gap_error[i]);
  row("min_gap", 0, m.min_gap);
  row("max_abs_effort", 0, m.max_abs_effort);
  for (size_t i = 0; i < m.solve_seconds.size(); ++i)
    row("solve_seconds", static_cast<int>(i + 1), m.solve_seconds[i]);
  row("window_start", 0, m.window_start);
  row("window_end", 0, m.window_end);
}

}  // namespace platoon
