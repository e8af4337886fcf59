#pragma once

#include <string>
#include <vector>

#include "platoon/simulate.hpp"

namespace platoon {

/// Scalar summaries of one evaluation run over a time window.
struct MetricsReport {
  std::vector<double> rms_velocity_dev;  ///< per vehicle [m/s]
  std::vector<double> rms_gap_error;     ///< per gap (gap 0 is the virtual leader gap) [m]
  double min_gap = 0.0;                  ///< smallest physical follower gap [m]
  double max_abs_effort = 0.0;           ///< [N]
  std::vector<double> solve_seconds;     ///< synthesis solve times, filled by pipelines
  std::vector<std::string> solver_status;
  double window_start = 0.0;
  double window_end = 0.0;
};

/// RMS/extreme statistics over [window_start, window_end]. Throws on an
/// empty window.
MetricsReport compute_metrics(const Trajectory& traj, const PlatoonSpec& spec,
                              double window_start, double window_end);

void write_metrics_csv(const MetricsReport& m, const std::string& path);

}  // namespace platoon
