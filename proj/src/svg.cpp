#include "ssimpc/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ssimpc {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 72.0;
constexpr double kRight = 24.0;
constexpr double kTop = 46.0;
constexpr double kBottom = 56.0;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

struct Axis {
  double lo = 0.0, hi = 1.0;
  bool log = false;

  double transform(double v) const { return log ? std::log10(v) : v; }
  double unit(double v) const {
    return (transform(v) - lo) / (hi - lo);
  }
};

// Tick step of the form {1, 2, 5} * 10^k closest to spanning ~5 intervals.
double nice_step(double range) {
  const double raw = range / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double frac = raw / mag;
  double step;
  if (frac < 1.5) {
    step = 1.0;
  } else if (frac < 3.5) {
    step = 2.0;
  } else if (frac < 7.5) {
    step = 5.0;
  } else {
    step = 10.0;
  }
  return step * mag;
}

std::vector<double> ticks_for(const Axis& axis) {
  std::vector<double> t;
  if (axis.log) {
    const int lo = static_cast<int>(std::ceil(axis.lo - 1e-9));
    const int hi = static_cast<int>(std::floor(axis.hi + 1e-9));
    for (int e = lo; e <= hi; ++e) {
      t.push_back(std::pow(10.0, e));
    }
    if (t.size() < 2) {
      t = {std::pow(10.0, axis.lo), std::pow(10.0, axis.hi)};
    }
  } else {
    const double step = nice_step(axis.hi - axis.lo);
    const double first = std::ceil(axis.lo / step) * step;
    for (double v = first; v <= axis.hi + 0.5 * step; v += step) {
      // Snap values like 2.0000000000000004 back to the grid.
      const double snapped = std::round(v / step) * step;
      t.push_back(snapped == 0.0 ? 0.0 : snapped);
    }
  }
  return t;
}

}  // namespace

std::string render_plot(const PlotSpec& spec) {
  Axis ax, ay;
  ax.log = spec.log_x;
  ay.log = spec.log_y;

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  std::vector<std::vector<std::pair<double, double>>> drawable(
      spec.series.size());
  for (std::size_t s = 0; s < spec.series.size(); ++s) {
    const PlotSeries& ser = spec.series[s];
    if (ser.x.size() != ser.y.size()) {
      throw std::invalid_argument("render_plot: series x/y length mismatch");
    }
    for (std::size_t i = 0; i < ser.x.size(); ++i) {
      const double x = ser.x[i], y = ser.y[i];
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if (spec.log_x && x <= 0.0) continue;
      if (spec.log_y && y <= 0.0) continue;
      drawable[s].emplace_back(x, y);
      xmin = std::min(xmin, ax.transform(x));
      xmax = std::max(xmax, ax.transform(x));
      ymin = std::min(ymin, ay.transform(y));
      ymax = std::max(ymax, ay.transform(y));
    }
  }
  if (!(xmin <= xmax)) {
    throw std::invalid_argument("render_plot: no drawable samples");
  }
  if (xmax - xmin < 1e-12) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (ymax - ymin < 1e-12) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double xpad = 0.03 * (xmax - xmin);
  const double ypad = 0.06 * (ymax - ymin);
  ax.lo = xmin - xpad;
  ax.hi = xmax + xpad;
  ay.lo = ymin - ypad;
  ay.hi = ymax + ypad;

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const auto px = [&](double v) { return kLeft + ax.unit(v) * plot_w; };
  const auto py = [&](double v) {
    return kTop + (1.0 - ay.unit(v)) * plot_h;
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(kWidth)
      << "\" height=\"" << fmt(kHeight) << "\" viewBox=\"0 0 " << fmt(kWidth)
      << " " << fmt(kHeight) << "\">\n";
  out << "<rect width=\"" << fmt(kWidth) << "\" height=\"" << fmt(kHeight)
      << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << fmt(kWidth / 2)
      << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"16\">"
      << escape(spec.title) << "</text>\n";

  // Grid and ticks.
  out << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  for (double v : ticks_for(ax)) {
    const double gx = px(v);
    if (gx < kLeft - 0.5 || gx > kWidth - kRight + 0.5) continue;
    out << "<line x1=\"" << fmt(gx) << "\" y1=\"" << fmt(kTop) << "\" x2=\""
        << fmt(gx) << "\" y2=\"" << fmt(kHeight - kBottom)
        << "\" stroke=\"#ddd\"/>\n";
    out << "<text x=\"" << fmt(gx) << "\" y=\"" << fmt(kHeight - kBottom + 16)
        << "\" text-anchor=\"middle\">" << fmt(v) << "</text>\n";
  }
  for (double v : ticks_for(ay)) {
    const double gy = py(v);
    if (gy < kTop - 0.5 || gy > kHeight - kBottom + 0.5) continue;
    out << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(gy) << "\" x2=\""
        << fmt(kWidth - kRight) << "\" y2=\"" << fmt(gy)
        << "\" stroke=\"#ddd\"/>\n";
    out << "<text x=\"" << fmt(kLeft - 6) << "\" y=\"" << fmt(gy + 4)
        << "\" text-anchor=\"end\">" << fmt(v) << "</text>\n";
  }
  out << "</g>\n";

  // Axes frame and labels.
  out << "<rect x=\"" << fmt(kLeft) << "\" y=\"" << fmt(kTop) << "\" width=\""
      << fmt(plot_w) << "\" height=\"" << fmt(plot_h)
      << "\" fill=\"none\" stroke=\"#333\"/>\n";
  out << "<text x=\"" << fmt(kLeft + plot_w / 2) << "\" y=\""
      << fmt(kHeight - 12)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\">"
      << escape(spec.x_label) << "</text>\n";
  out << "<text x=\"18\" y=\"" << fmt(kTop + plot_h / 2)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\" transform=\"rotate(-90 18 "
      << fmt(kTop + plot_h / 2) << ")\">" << escape(spec.y_label)
      << "</text>\n";

  // Series.
  for (std::size_t s = 0; s < spec.series.size(); ++s) {
    const PlotSeries& ser = spec.series[s];
    if (drawable[s].empty()) continue;
    if (ser.points_only) {
      out << "<g fill=\"" << ser.color << "\">\n";
      for (const auto& [x, y] : drawable[s]) {
        out << "<circle cx=\"" << fmt(px(x)) << "\" cy=\"" << fmt(py(y))
            << "\" r=\"3\"/>\n";
      }
      out << "</g>\n";
    } else {
      out << "<polyline fill=\"none\" stroke=\"" << ser.color
          << "\" stroke-width=\"1.6\" points=\"";
      for (const auto& [x, y] : drawable[s]) {
        out << fmt(px(x)) << "," << fmt(py(y)) << " ";
      }
      out << "\"/>\n";
    }
  }

  // Legend.
  double ly = kTop + 14.0;
  out << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  for (std::size_t s = 0; s < spec.series.size(); ++s) {
    const PlotSeries& ser = spec.series[s];
    if (ser.label.empty() || drawable[s].empty()) continue;
    const double lx = kLeft + 12.0;
    out << "<line x1=\"" << fmt(lx) << "\" y1=\"" << fmt(ly - 4) << "\" x2=\""
        << fmt(lx + 22) << "\" y2=\"" << fmt(ly - 4) << "\" stroke=\""
        << ser.color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << fmt(lx + 28) << "\" y=\"" << fmt(ly) << "\">"
        << escape(ser.label) << "</text>\n";
    ly += 16.0;
  }
  for (const std::string& note : spec.annotations) {
    out << "<text x=\"" << fmt(kLeft + 12.0) << "\" y=\"" << fmt(ly)
        << "\" fill=\"#555\">" << escape(note) << "</text>\n";
    ly += 16.0;
  }
  out << "</g>\n";
  out << "</svg>\n";
  return out.str();
}

}  // namespace ssimpc
