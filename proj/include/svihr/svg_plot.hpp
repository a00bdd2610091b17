#pragma once

// Minimal deterministic SVG charts (polylines, scatter, axes, legend) on a
// fixed 800x500 viewBox. No timestamps or external resources, so repeated
// runs produce byte-identical files.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "svihr/errors.hpp"

namespace svihr::svg {

struct Series {
  std::string label;
  std::string color;
  std::vector<std::pair<double, double>> points;
  bool line = true;
  bool markers = false;
};

inline constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c",
                                           "#d62728", "#9467bd", "#555555"};

namespace detail {

inline std::string num(double v, const char* fmt = "%.2f") {
  char buf[40];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

struct Range {
  double lo = 0, hi = 1;
  void widen(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
};

}  // namespace detail

inline std::string chart(const std::string& title, const std::string& xlabel,
                         const std::string& ylabel,
                         const std::vector<Series>& series) {
  const double w = 800, h = 500;
  const double ml = 80, mr = 20, mt = 40, mb = 55;

  bool any = false;
  double xlo = 0, xhi = 1, ylo = 0, yhi = 1;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if (!any) {
        xlo = xhi = x;
        ylo = yhi = y;
        any = true;
      }
      xlo = std::min(xlo, x);
      xhi = std::max(xhi, x);
      ylo = std::min(ylo, y);
      yhi = std::max(yhi, y);
    }
  if (xhi <= xlo) xhi = xlo + 1;
  if (yhi <= ylo) yhi = ylo + (std::abs(ylo) > 0 ? std::abs(ylo) * 0.1 : 1.0);
  double ypad = 0.05 * (yhi - ylo);
  ylo -= ypad;
  yhi += ypad;

  auto px = [&](double x) { return ml + (x - xlo) / (xhi - xlo) * (w - ml - mr); };
  auto py = [&](double y) { return h - mb - (y - ylo) / (yhi - ylo) * (h - mt - mb); };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 500\" "
         "font-family=\"sans-serif\" font-size=\"13\">\n";
  out += "<rect width=\"800\" height=\"500\" fill=\"white\"/>\n";
  out += "<text x=\"400\" y=\"22\" text-anchor=\"middle\" font-size=\"16\">" +
         title + "</text>\n";

  // axes
  out += "<line x1=\"" + detail::num(ml) + "\" y1=\"" + detail::num(h - mb) +
         "\" x2=\"" + detail::num(w - mr) + "\" y2=\"" + detail::num(h - mb) +
         "\" stroke=\"black\"/>\n";
  out += "<line x1=\"" + detail::num(ml) + "\" y1=\"" + detail::num(mt) +
         "\" x2=\"" + detail::num(ml) + "\" y2=\"" + detail::num(h - mb) +
         "\" stroke=\"black\"/>\n";

  const int ticks = 5;
  for (int i = 0; i <= ticks; ++i) {
    double x = xlo + (xhi - xlo) * i / ticks;
    double y = ylo + (yhi - ylo) * i / ticks;
    out += "<line x1=\"" + detail::num(px(x)) + "\" y1=\"" + detail::num(h - mb) +
           "\" x2=\"" + detail::num(px(x)) + "\" y2=\"" +
           detail::num(h - mb + 5) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + detail::num(px(x)) + "\" y=\"" +
           detail::num(h - mb + 20) + "\" text-anchor=\"middle\">" +
           detail::num(x, "%.4g") + "</text>\n";
    out += "<line x1=\"" + detail::num(ml - 5) + "\" y1=\"" + detail::num(py(y)) +
           "\" x2=\"" + detail::num(ml) + "\" y2=\"" + detail::num(py(y)) +
           "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + detail::num(ml - 8) + "\" y=\"" +
           detail::num(py(y) + 4) + "\" text-anchor=\"end\">" +
           detail::num(y, "%.4g") + "</text>\n";
  }
  out += "<text x=\"" + detail::num(ml + (w - ml - mr) / 2) + "\" y=\"" +
         detail::num(h - 12) + "\" text-anchor=\"middle\">" + xlabel +
         "</text>\n";
  out += "<text x=\"18\" y=\"" + detail::num(mt + (h - mt - mb) / 2) +
         "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
         detail::num(mt + (h - mt - mb) / 2) + ")\">" + ylabel + "</text>\n";

  for (const auto& s : series) {
    if (s.line && s.points.size() > 1) {
      std::string pts;
      for (const auto& [x, y] : s.points) {
        if (!std::isfinite(x) || !std::isfinite(y)) continue;
        pts += detail::num(px(x)) + "," + detail::num(py(y)) + " ";
      }
      out += "<polyline fill=\"none\" stroke=\"" + s.color +
             "\" stroke-width=\"1.8\" points=\"" + pts + "\"/>\n";
    }
    if (s.markers || !s.line) {
      for (const auto& [x, y] : s.points) {
        if (!std::isfinite(x) || !std::isfinite(y)) continue;
        out += "<circle cx=\"" + detail::num(px(x)) + "\" cy=\"" +
               detail::num(py(y)) + "\" r=\"3.5\" fill=\"" + s.color + "\"/>\n";
      }
    }
  }

  double ly = mt + 8;
  for (const auto& s : series) {
    if (s.label.empty()) continue;
    out += "<rect x=\"" + detail::num(w - mr - 170) + "\" y=\"" +
           detail::num(ly - 9) + "\" width=\"12\" height=\"12\" fill=\"" +
           s.color + "\"/>\n";
    out += "<text x=\"" + detail::num(w - mr - 152) + "\" y=\"" +
           detail::num(ly + 2) + "\">" + s.label + "</text>\n";
    ly += 18;
  }
  out += "</svg>\n";
  return out;
}

inline void write(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write plot: " + path);
  out << content;
}

}  // namespace svihr::svg
