#include "dynpriv/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace dynpriv::svg {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;

struct Frame {
  double x0, x1, y0, y1;

  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const {
    return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom);
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

Frame fit_frame(double x0, double x1, double y0, double y1) {
  if (!(x1 > x0)) x1 = x0 + 1;
  if (!(y1 > y0)) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double pad = 0.05 * (y1 - y0);
  return {x0, x1, y0 - pad, y1 + pad};
}

std::string header(const Axes& axes, const Frame& f) {
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) +
                  "\" height=\"" + num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(kWidth / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" +
       escape(axes.title) + "</text>\n";
  s += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" +
       num(kWidth - kLeft - kRight) + "\" height=\"" + num(kHeight - kTop - kBottom) +
       "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = f.x0 + (f.x1 - f.x0) * k / 4.0;
    const double yv = f.y0 + (f.y1 - f.y0) * k / 4.0;
    s += "<text x=\"" + num(f.px(xv)) + "\" y=\"" + num(kHeight - kBottom + 16) +
         "\" text-anchor=\"middle\">" + label(xv) + "</text>\n";
    s += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(f.py(yv) + 4) +
         "\" text-anchor=\"end\">" + label(yv) + "</text>\n";
  }
  s += "<text x=\"" + num(kWidth / 2) + "\" y=\"" + num(kHeight - 10) +
       "\" text-anchor=\"middle\">" + escape(axes.xlabel) + "</text>\n";
  s += "<text x=\"16\" y=\"" + num(kHeight / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       num(kHeight / 2) + ")\">" + escape(axes.ylabel) + "</text>\n";
  return s;
}

}  // namespace

std::string palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                 "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  return colors[i % 10];
}

std::string line_plot(const Axes& axes, const std::vector<Series>& series, std::size_t max_points) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const Series& s : series) {
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
      x0 = std::min(x0, s.x[k]);
      x1 = std::max(x1, s.x[k]);
      y0 = std::min(y0, s.y[k]);
      y1 = std::max(y1, s.y[k]);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  const Frame f = fit_frame(x0, x1, y0, y1);
  std::string out = header(axes, f);
  for (const Series& s : series) {
    if (s.x.empty()) continue;
    const std::size_t stride = std::max<std::size_t>(1, s.x.size() / std::max<std::size_t>(1, max_points));
    out += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"" + num(s.width) + "\"";
    if (s.dotted) out += " stroke-dasharray=\"2,3\"";
    out += " points=\"";
    for (std::size_t k = 0; k < s.x.size(); k += stride) {
      out += num(f.px(s.x[k])) + ',' + num(f.py(s.y[k])) + ' ';
    }
    const std::size_t last = s.x.size() - 1;
    if (last % stride != 0) out += num(f.px(s.x[last])) + ',' + num(f.py(s.y[last]));
    out += "\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

std::string scatter_plot(const Axes& axes, const std::vector<double>& x,
                         const std::vector<double>& y, bool diagonal) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t k = 0; k < x.size(); ++k) {
    lo = std::min({lo, x[k], y[k]});
    hi = std::max({hi, x[k], y[k]});
  }
  if (!std::isfinite(lo)) lo = 0, hi = 1;
  const Frame f = fit_frame(lo, hi, lo, hi);
  std::string out = header(axes, f);
  if (diagonal) {
    out += "<line x1=\"" + num(f.px(f.x0)) + "\" y1=\"" + num(f.py(f.x0)) + "\" x2=\"" +
           num(f.px(f.x1)) + "\" y2=\"" + num(f.py(f.x1)) +
           "\" stroke=\"gray\" stroke-dasharray=\"4,4\"/>\n";
  }
  for (std::size_t k = 0; k < x.size(); ++k) {
    out += "<circle cx=\"" + num(f.px(x[k])) + "\" cy=\"" + num(f.py(y[k])) +
           "\" r=\"2.5\" fill=\"#1f77b4\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace dynpriv::svg
