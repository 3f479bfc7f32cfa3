#include "cyclic/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cyclic {

namespace {

constexpr double kWidth = 720.0;
constexpr double kPanelHeight = 260.0;
constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 30.0;
constexpr double kMarginBottom = 40.0;
constexpr std::size_t kMaxPoints = 2000;

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

Range range_of(const std::vector<Series>& series, bool use_x) {
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& s : series)
    for (double v : use_x ? s.x : s.y) {
      if (!std::isfinite(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  if (!std::isfinite(lo)) return {};
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

class Panel {
 public:
  Panel(double top, double height, Range xr, Range yr)
      : top_(top), height_(height), xr_(xr), yr_(yr) {}

  PixelPoint map(double x, double y) const {
    const double w = kWidth - kMarginLeft - kMarginRight;
    const double h = height_ - kMarginTop - kMarginBottom;
    return {kMarginLeft + (x - xr_.lo) / (xr_.hi - xr_.lo) * w,
            top_ + kMarginTop + (1.0 - (y - yr_.lo) / (yr_.hi - yr_.lo)) * h};
  }

  void frame(std::ostream& out, const std::string& title, const std::string& xlabel,
             const std::string& ylabel) const {
    const PixelPoint a = map(xr_.lo, yr_.hi), b = map(xr_.hi, yr_.lo);
    out << "<rect x=\"" << px(a.x) << "\" y=\"" << px(a.y) << "\" width=\"" << px(b.x - a.x)
        << "\" height=\"" << px(b.y - a.y) << "\" fill=\"none\" stroke=\"#444\"/>\n";
    out << "<text x=\"" << px(kWidth / 2) << "\" y=\"" << px(top_ + 18)
        << "\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
    out << "<text x=\"" << px((a.x + b.x) / 2) << "\" y=\"" << px(b.y + 32)
        << "\" text-anchor=\"middle\" font-size=\"12\">" << xlabel << "</text>\n";
    out << "<text x=\"14\" y=\"" << px((a.y + b.y) / 2) << "\" font-size=\"12\" transform=\"rotate(-90 14 "
        << px((a.y + b.y) / 2) << ")\" text-anchor=\"middle\">" << ylabel << "</text>\n";
    for (int i = 0; i <= 4; ++i) {
      const double fx = xr_.lo + (xr_.hi - xr_.lo) * i / 4.0;
      const double fy = yr_.lo + (yr_.hi - yr_.lo) * i / 4.0;
      const PixelPoint tx = map(fx, yr_.lo), ty = map(xr_.lo, fy);
      out << "<text x=\"" << px(tx.x) << "\" y=\"" << px(tx.y + 14)
          << "\" text-anchor=\"middle\" font-size=\"10\">" << fmt(fx) << "</text>\n";
      out << "<text x=\"" << px(ty.x - 4) << "\" y=\"" << px(ty.y + 3)
          << "\" text-anchor=\"end\" font-size=\"10\">" << fmt(fy) << "</text>\n";
    }
  }

  void polyline(std::ostream& out, const Series& s, const char* color) const {
    const std::size_t n = s.x.size();
    const std::size_t stride = std::max<std::size_t>(1, n / kMaxPoints);
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.3\" points=\"";
    for (std::size_t i = 0; i < n; i += stride) {
      const PixelPoint p = map(s.x[i], s.y[i]);
      out << px(p.x) << ',' << px(p.y) << ' ';
    }
    if (n > 0 && (n - 1) % stride != 0) {
      const PixelPoint p = map(s.x[n - 1], s.y[n - 1]);
      out << px(p.x) << ',' << px(p.y);
    }
    out << "\"/>\n";
  }

  void legend(std::ostream& out, const std::vector<Series>& series) const {
    double y = top_ + kMarginTop + 14;
    for (std::size_t i = 0; i < series.size(); ++i, y += 14) {
      const char* color = kColors[i % std::size(kColors)];
      out << "<line x1=\"" << px(kWidth - 130) << "\" y1=\"" << px(y - 4) << "\" x2=\""
          << px(kWidth - 110) << "\" y2=\"" << px(y - 4) << "\" stroke=\"" << color
          << "\" stroke-width=\"2\"/>\n";
      out << "<text x=\"" << px(kWidth - 105) << "\" y=\"" << px(y) << "\" font-size=\"11\">"
          << series[i].label << "</text>\n";
    }
  }

 private:
  double top_, height_;
  Range xr_, yr_;
};

void header(std::ostream& out, double height) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px(kWidth) << "\" height=\""
      << px(height) << "\" viewBox=\"0 0 " << px(kWidth) << ' ' << px(height)
      << "\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

void save(const std::filesystem::path& path, const std::string& body) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write plot " + path.string());
  f << body;
  if (!f) throw std::runtime_error("error while writing plot " + path.string());
}

std::vector<Series> time_series(const Trajectory& traj, const std::vector<std::string>& names,
                                bool cyclic) {
  std::vector<Series> out(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    out[i].label = names[i];
    out[i].x = traj.times;
    out[i].y.reserve(traj.size());
  }
  for (const auto& s : traj.states) {
    const Vector& v = cyclic ? s.x : s.y;
    for (std::size_t i = 0; i < names.size(); ++i) out[i].y.push_back(v[static_cast<Eigen::Index>(i)]);
  }
  return out;
}

void draw_panel(std::ostream& out, double top, const std::vector<Series>& series,
                const std::string& title, const std::string& ylabel) {
  Panel panel(top, kPanelHeight, range_of(series, true), range_of(series, false));
  panel.frame(out, title, "t [s]", ylabel);
  for (std::size_t i = 0; i < series.size(); ++i)
    panel.polyline(out, series[i], kColors[i % std::size(kColors)]);
  panel.legend(out, series);
}

std::filesystem::path time_plot(const std::filesystem::path& file, const std::vector<Series>& series,
                                const std::string& title) {
  std::ostringstream out;
  header(out, kPanelHeight);
  draw_panel(out, 0.0, series, title, "coordinate");
  out << "</svg>\n";
  save(file, out.str());
  return file;
}

}  // namespace

PlotSet emit_plots(const MechanicalSystem& system, const Trajectory& trajectory,
                   const std::filesystem::path& dir, const std::string& prefix) {
  PlotSet set;
  if (trajectory.empty()) return set;
  const bool pendulum = system.name == "planar_pendulum";
  const std::string a = pendulum ? "theta" : "actuated";
  const std::string c = pendulum ? "xy" : "cyclic";

  const auto shape = time_series(trajectory, system.shape_names, false);
  const auto cyc = time_series(trajectory, system.cyclic_names, true);

  set.files.push_back(time_plot(dir / (prefix + a + "_time.svg"), shape, "actuated coordinates"));
  set.files.push_back(time_plot(dir / (prefix + c + "_time.svg"), cyc, "cyclic coordinates"));

  {
    std::ostringstream out;
    header(out, 2 * kPanelHeight);
    draw_panel(out, 0.0, shape, "actuated coordinates", "coordinate");
    draw_panel(out, kPanelHeight, cyc, "cyclic coordinates", "coordinate");
    out << "</svg>\n";
    const auto file = dir / (prefix + "joints_time.svg");
    save(file, out.str());
    set.files.push_back(file);
  }

  if (system.dims.r == 2) {
    Series plane{system.cyclic_names[0] + " vs " + system.cyclic_names[1], cyc[0].y, cyc[1].y};
    // Equal scaling keeps the plane geometry undistorted.
    Range xr = range_of({plane}, true), yr = range_of({plane}, false);
    const double half = 0.5 * std::max(xr.hi - xr.lo, yr.hi - yr.lo);
    const double cx = 0.5 * (xr.lo + xr.hi), cy = 0.5 * (yr.lo + yr.hi);
    xr = {cx - half, cx + half};
    yr = {cy - half, cy + half};
    const double height = kWidth - kMarginLeft - kMarginRight + kMarginTop + kMarginBottom;
    Panel panel(0.0, height, xr, yr);
    std::ostringstream out;
    header(out, height);
    panel.frame(out, "cyclic plane", system.cyclic_names[0], system.cyclic_names[1]);
    panel.polyline(out, plane, kColors[0]);
    const PixelPoint s = panel.map(plane.x.front(), plane.y.front());
    const PixelPoint e = panel.map(plane.x.back(), plane.y.back());
    out << "<circle id=\"start\" cx=\"" << px(s.x) << "\" cy=\"" << px(s.y)
        << "\" r=\"5\" fill=\"#2ca02c\"/>\n";
    out << "<rect id=\"end\" x=\"" << px(e.x - 4) << "\" y=\"" << px(e.y - 4)
        << "\" width=\"8\" height=\"8\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
    out << "</svg>\n";
    const auto file = dir / (prefix + c + "_plane.svg");
    save(file, out.str());
    set.files.push_back(file);
    set.plane_start = s;
    set.plane_end = e;
  }
  return set;
}

}  // namespace cyclic
