#include "platoon/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace platoon {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

struct Range {
  double lo = 0.0, hi = 1.0;
  void expand(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
};

std::string ticks(double lo, double hi, int n, bool as_int) {
  std::ostringstream os;
  for (int i = 0; i <= n; ++i) {
    const double v = lo + (hi - lo) * i / n;
    if (as_int)
      os << static_cast<long long>(std::llround(v));
    else
      os << v;
    if (i < n) os << " ";
  }
  return os.str();
}

}  // namespace

void write_svg_plot(const PlotSpec& plot, const std::string& path) {
  if (plot.series.empty()) throw std::invalid_argument("write_svg_plot: no series");
  Range rx, ry;
  bool any = false;
  for (const auto& s : plot.series) {
    if (s.x.size() != s.y.size())
      throw std::invalid_argument("write_svg_plot: series size mismatch");
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!any) {
        rx = {s.x[i], s.x[i]};
        ry = {s.y[i], s.y[i]};
        any = true;
      }
      rx.expand(s.x[i]);
      ry.expand(s.y[i]);
    }
  }
  if (!any) throw std::invalid_argument("write_svg_plot: empty series");
  for (double h : plot.h_lines) ry.expand(h);
  if (ry.hi - ry.lo < 1e-9) {
    ry.lo -= 1.0;
    ry.hi += 1.0;
  }
  const double ml = 64, mr = 16, mt = 34, mb = 44;
  const double pw = plot.width - ml - mr, ph = plot.height - mt - mb;
  const auto sx = [&](double x) { return ml + (x - rx.lo) / (rx.hi - rx.lo) * pw; };
  const auto sy = [&](double y) { return mt + (ry.hi - y) / (ry.hi - ry.lo) * ph; };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_svg_plot: cannot open " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << plot.width
      << "\" height=\"" << plot.height << "\" viewBox=\"0 0 " << plot.width << " "
      << plot.height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << plot.width / 2 << "\" y=\"20\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"14\">" << plot.title << "</text>\n";

  // axes
  out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\""
      << ph << "\" fill=\"none\" stroke=\"#333\"/>\n";
  for (int i = 0; i <= 6; ++i) {
    const double x = rx.lo + (rx.hi - rx.lo) * i / 6;
    out << "<text x=\"" << sx(x) << "\" y=\"" << plot.height - mb + 16
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
        << static_cast<long long>(std::llround(x)) << "</text>\n";
  }
  for (int i = 0; i <= 5; ++i) {
    const double y = ry.lo + (ry.hi - ry.lo) * i / 5;
    std::ostringstream lbl;
    lbl.precision(3);
    lbl << y;
    out << "<text x=\"" << ml - 6 << "\" y=\"" << sy(y) + 3
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">"
        << lbl.str() << "</text>\n";
  }
  out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << plot.height - 8
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
      << plot.x_label << "</text>\n";
  out << "<text x=\"14\" y=\"" << mt + ph / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\" "
      << "transform=\"rotate(-90 14 " << mt + ph / 2 << ")\">" << plot.y_label
      << "</text>\n";

  for (double h : plot.h_lines)
    out << "<line x1=\"" << ml << "\" y1=\"" << sy(h) << "\" x2=\"" << ml + pw
        << "\" y2=\"" << sy(h) << "\" stroke=\"#999\" stroke-dasharray=\"2,4\"/>\n";

  for (const auto& s : plot.series) {
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.1\"";
    if (s.dashed) out << " stroke-dasharray=\"5,3\"";
    out << " points=\"";
    const size_t stride = std::max<size_t>(1, s.x.size() / 4000);
    for (size_t i = 0; i < s.x.size(); i += stride)
      out << sx(s.x[i]) << "," << sy(s.y[i]) << " ";
    out << "\"/>\n";
  }

  // legend
  double ly = mt + 12;
  for (const auto& s : plot.series) {
    out << "<line x1=\"" << ml + 8 << "\" y1=\"" << ly << "\" x2=\"" << ml + 34
        << "\" y2=\"" << ly << "\" stroke=\"" << s.color << "\"";
    if (s.dashed) out << " stroke-dasharray=\"5,3\"";
    out << "/>\n<text x=\"" << ml + 38 << "\" y=\"" << ly + 3
        << "\" font-family=\"sans-serif\" font-size=\"10\">" << s.label << "</text>\n";
    ly += 13;
  }
  out << "</svg>\n";
  (void)ticks;
}

std::vector<std::string> emit_plots(const Trajectory& cacc, const Trajectory& acc,
                                    const PlatoonSpec& spec, const std::string& outdir) {
  if (cacc.sample_count() == 0 || acc.sample_count() == 0)
    throw std::invalid_argument("emit_plots: empty trajectory");
  const int n = spec.size();

  PlotSpec vel;
  vel.title = "Velocity deviation from the reference";
  vel.x_label = "time [s]";
  vel.y_label = "velocity deviation [m/s]";
  PlotSpec gap;
  gap.title = "Inter-vehicular distance";
  gap.x_label = "time [s]";
  gap.y_label = "gap [m]";
  gap.h_lines.push_back(spec.h_star);

  const auto add = [&](const Trajectory& traj, const char* tag, bool dashed) {
    for (int i = 0; i < n; ++i) {
      PlotSeries sv;
      sv.label = std::string("vehicle ") + std::to_string(i + 1) + " " + tag;
      sv.color = kPalette[i % 8];
      sv.dashed = dashed;
      PlotSeries sg = sv;
      sg.label = std::string("gap ") + std::to_string(i + 1) + " " + tag;
      for (int k = 0; k < traj.sample_count(); ++k) {
        sv.x.push_back(traj.times[k]);
        sv.y.push_back(traj.steps[k][i].v_err);
        sg.x.push_back(traj.times[k]);
        sg.y.push_back(traj.steps[k][i].h_err + spec.h_star);
      }
      vel.series.push_back(std::move(sv));
      gap.series.push_back(std::move(sg));
    }
  };
  add(cacc, "(learned)", false);
  add(acc, "(acc)", true);

  const std::string vel_path = outdir + "/velocity_deviation.svg";
  const std::string gap_path = outdir + "/gaps.svg";
  write_svg_plot(vel, vel_path);
  write_svg_plot(gap, gap_path);
  return {vel_path, gap_path};
}

}  // namespace platoon
