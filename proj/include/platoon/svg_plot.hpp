#pragma once

#include <string>
#include <vector>

#include "platoon/simulate.hpp"

namespace platoon {

/// One named series of (x, y) points.
struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
  std::string color = "#1f77b4";
  bool dashed = false;
};

struct PlotSpec {
  std::string title, x_label, y_label;
  std::vector<PlotSeries> series;
  std::vector<double> h_lines;  ///< horizontal reference lines
  int width = 900, height = 420;
};

void write_svg_plot(const PlotSpec& plot, const std::string& path);

/// Writes the two comparison figures for an evaluation pair: per-vehicle
/// velocity deviation over time and per-gap spacing over time, the second
/// with a reference line at the desired gap. Returns the emitted file paths.
std::vector<std::string> emit_plots(const Trajectory& cacc, const Trajectory& acc,
                                    const PlatoonSpec& spec, const std::string& outdir);

}  // namespace platoon
