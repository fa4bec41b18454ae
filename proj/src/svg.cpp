#include "kvwave/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "kvwave/common.hpp"

namespace kvwave::svg {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  if (v == 0.0) return "0";
  char buf[32];
  const double a = std::abs(v);
  std::snprintf(buf, sizeof buf, (a >= 1e4 || a < 1e-3) ? "%.3g" : "%g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

double nice_step(double span, int target) {
  const double raw = span / std::max(1, target);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  const double nice = f < 1.5 ? 1.0 : f < 3.0 ? 2.0 : f < 7.0 ? 5.0 : 10.0;
  return nice * mag;
}

struct Frame {
  double x0, x1, y0, y1;
  std::vector<double> xt, yt;

  [[nodiscard]] double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  [[nodiscard]] double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

void widen(double& lo, double& hi) {
  if (hi > lo) return;
  const double pad = lo == 0.0 ? 1.0 : 0.5 * std::abs(lo);
  lo -= pad;
  hi += pad;
}

Frame make_frame(double xlo, double xhi, double ylo, double yhi) {
  widen(xlo, xhi);
  widen(ylo, yhi);
  Frame f;
  f.xt = nice_ticks(xlo, xhi);
  f.yt = nice_ticks(ylo, yhi);
  f.x0 = f.xt.front();
  f.x1 = f.xt.back();
  f.y0 = f.yt.front();
  f.y1 = f.yt.back();
  return f;
}

void open_svg(std::ostringstream& os, const std::string& title) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\"" << num(kHeight)
     << "\" viewBox=\"0 0 " << num(kWidth) << ' ' << num(kHeight) << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << num(kWidth) << "\" height=\"" << num(kHeight) << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << num(kWidth / 2) << "\" y=\"24.00\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"15\">"
     << escape(title) << "</text>\n";
}

void draw_axes(std::ostringstream& os, const Frame& f, const std::string& xl, const std::string& yl) {
  const double bx = f.px(f.x0), ex = f.px(f.x1), by = f.py(f.y0), ey = f.py(f.y1);
  os << "<g stroke=\"#cccccc\" stroke-width=\"1\">\n";
  for (double t : f.xt) os << "<line x1=\"" << num(f.px(t)) << "\" y1=\"" << num(by) << "\" x2=\"" << num(f.px(t)) << "\" y2=\"" << num(ey) << "\"/>\n";
  for (double t : f.yt) os << "<line x1=\"" << num(bx) << "\" y1=\"" << num(f.py(t)) << "\" x2=\"" << num(ex) << "\" y2=\"" << num(f.py(t)) << "\"/>\n";
  os << "</g>\n";
  os << "<rect x=\"" << num(bx) << "\" y=\"" << num(ey) << "\" width=\"" << num(ex - bx) << "\" height=\""
     << num(by - ey) << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
  os << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (double t : f.xt)
    os << "<text x=\"" << num(f.px(t)) << "\" y=\"" << num(by + 16) << "\" text-anchor=\"middle\">" << tick_label(t) << "</text>\n";
  for (double t : f.yt)
    os << "<text x=\"" << num(bx - 6) << "\" y=\"" << num(f.py(t) + 4) << "\" text-anchor=\"end\">" << tick_label(t) << "</text>\n";
  os << "</g>\n";
  os << "<text x=\"" << num(0.5 * (bx + ex)) << "\" y=\"" << num(kHeight - 16) << "\" text-anchor=\"middle\" "
        "font-family=\"sans-serif\" font-size=\"13\">" << escape(xl) << "</text>\n";
  os << "<text x=\"18.00\" y=\"" << num(0.5 * (by + ey)) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"13\" transform=\"rotate(-90 18.00 " << num(0.5 * (by + ey)) << ")\">" << escape(yl) << "</text>\n";
}

}  // namespace

std::vector<double> nice_ticks(double lo, double hi, int target) {
  require(std::isfinite(lo) && std::isfinite(hi) && hi > lo, "nice_ticks: invalid range");
  const double step = nice_step(hi - lo, target);
  const double first = std::floor(lo / step) * step;
  const double last = std::ceil(hi / step) * step;
  std::vector<double> ticks;
  const auto count = static_cast<long>(std::llround((last - first) / step));
  for (long i = 0; i <= count; ++i) {
    double t = first + static_cast<double>(i) * step;
    if (std::abs(t) < 1e-12 * step) t = 0.0;
    ticks.push_back(t);
  }
  return ticks;
}

std::string render(const Plot& plot) {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
  std::size_t finite = 0;
  for (const auto& s : plot.series) {
    require(s.x.size() == s.y.size(), "svg::render: series '" + s.label + "' has mismatched x and y");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      ++finite;
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      ylo = std::min(ylo, s.y[i]);
      yhi = std::max(yhi, s.y[i]);
    }
  }
  if (finite == 0) throw Error("nothing to plot");
  const Frame f = make_frame(xlo, xhi, ylo, yhi);

  std::ostringstream os;
  open_svg(os, plot.title);
  draw_axes(os, f, plot.x_label, plot.y_label);
  for (const auto& s : plot.series) {
    if (s.style == Style::Line) {
      os << "<polyline fill=\"none\" stroke=\"" << escape(s.color) << "\" stroke-width=\"1.5\" points=\"";
      bool first = true;
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        os << (first ? "" : " ") << num(f.px(s.x[i])) << ',' << num(f.py(s.y[i]));
        first = false;
      }
      os << "\"/>\n";
    } else {
      os << "<g fill=\"" << escape(s.color) << "\">\n";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        os << "<circle cx=\"" << num(f.px(s.x[i])) << "\" cy=\"" << num(f.py(s.y[i])) << "\" r=\"2.00\"/>\n";
      }
      os << "</g>\n";
    }
  }
  double ly = kTop + 14.0;
  for (const auto& s : plot.series) {
    if (s.label.empty()) continue;
    const double lx = kWidth - kRight - 150.0;
    os << "<rect x=\"" << num(lx) << "\" y=\"" << num(ly - 8) << "\" width=\"10.00\" height=\"10.00\" fill=\""
       << escape(s.color) << "\"/>\n";
    os << "<text x=\"" << num(lx + 16) << "\" y=\"" << num(ly + 1) << "\" font-family=\"sans-serif\" font-size=\"11\">"
       << escape(s.label) << "</text>\n";
    ly += 16.0;
  }
  os << "</svg>\n";
  return os.str();
}

std::string render_histogram(const std::vector<double>& values, int bins, const std::string& title,
                             const std::string& x_label) {
  require(bins >= 1, "svg::render_histogram: bins must be positive");
  std::vector<double> v;
  for (double x : values)
    if (std::isfinite(x)) v.push_back(x);
  if (v.empty()) throw Error("nothing to plot");
  double lo = *std::min_element(v.begin(), v.end());
  double hi = *std::max_element(v.begin(), v.end());
  widen(lo, hi);
  std::vector<int> counts(bins, 0);
  const double width = (hi - lo) / bins;
  for (double x : v) ++counts[std::min(bins - 1, static_cast<int>((x - lo) / width))];
  const int top = *std::max_element(counts.begin(), counts.end());
  const Frame f = make_frame(lo, hi, 0.0, static_cast<double>(top));

  std::ostringstream os;
  open_svg(os, title);
  draw_axes(os, f, x_label, "count");
  os << "<g fill=\"#1f77b4\" stroke=\"white\" stroke-width=\"0.5\">\n";
  for (int b = 0; b < bins; ++b) {
    if (counts[b] == 0) continue;
    const double xa = f.px(lo + b * width), xb = f.px(lo + (b + 1) * width);
    const double ya = f.py(counts[b]), yb = f.py(0.0);
    os << "<rect x=\"" << num(xa) << "\" y=\"" << num(ya) << "\" width=\"" << num(xb - xa) << "\" height=\""
       << num(yb - ya) << "\"/>\n";
  }
  os << "</g>\n</svg>\n";
  return os.str();
}

}  // namespace kvwave::svg
