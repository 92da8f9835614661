// SPDX-License-Identifier: Apache-2.0
#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace hvacdr::tools {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
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

// 1, 2 or 5 times a power of ten, giving about `target` ticks.
double tick_step(double span, int target) {
  if (!(span > 0.0)) return 1.0;
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0})
    if (m * mag >= raw) return m * mag;
  return 10.0 * mag;
}

}  // namespace

std::string render_svg(const Chart& c, int width, int height) {
  const double left = 60, right = 130, top = 30, bottom = 45;
  const double pw = width - left - right, ph = height - top - bottom;

  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  for (double v : c.x) {
    x_lo = std::min(x_lo, v);
    x_hi = std::max(x_hi, v);
  }
  bool any_step = false;
  for (const auto& s : c.series) any_step = any_step || s.step;
  if (any_step && !c.x.empty()) x_hi += c.x.size() > 1 ? c.x[1] - c.x[0] : 1.0;
  double y_lo = std::numeric_limits<double>::infinity(), y_hi = -y_lo;
  auto grow = [&](const std::vector<double>& ys) {
    for (double v : ys)
      if (std::isfinite(v)) {
        y_lo = std::min(y_lo, v);
        y_hi = std::max(y_hi, v);
      }
  };
  for (const auto& s : c.series) grow(s.y);
  for (const auto& b : c.bands) {
    grow(b.lo);
    grow(b.hi);
  }
  if (!std::isfinite(x_lo)) x_lo = 0, x_hi = 1;
  if (x_hi <= x_lo) x_hi = x_lo + 1;
  if (!std::isfinite(y_lo)) y_lo = 0, y_hi = 1;
  if (y_hi <= y_lo) y_lo -= 0.5, y_hi += 0.5;
  const double pad = 0.05 * (y_hi - y_lo);
  y_lo -= pad;
  y_hi += pad;

  auto px = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * pw; };
  auto py = [&](double y) { return top + (y_hi - y) / (y_hi - y_lo) * ph; };

  std::string o;
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) + "\" height=\"" +
       std::to_string(height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o += "<text x=\"" + num(left) + "\" y=\"18\" font-size=\"13\">" + escape(c.title) + "</text>\n";

  const double ys = tick_step(y_hi - y_lo, 5);
  for (double v = std::ceil(y_lo / ys) * ys; v <= y_hi; v += ys) {
    o += "<line x1=\"" + num(left) + "\" x2=\"" + num(left + pw) + "\" y1=\"" + num(py(v)) + "\" y2=\"" + num(py(v)) +
         "\" stroke=\"#ddd\"/>\n";
    o += "<text x=\"" + num(left - 6) + "\" y=\"" + num(py(v) + 4) + "\" text-anchor=\"end\">" +
         num(std::abs(v) < 1e-12 ? 0.0 : v) + "</text>\n";
  }
  const double xs = tick_step(x_hi - x_lo, 8);
  for (double v = std::ceil(x_lo / xs) * xs; v <= x_hi; v += xs)
    o += "<text x=\"" + num(px(v)) + "\" y=\"" + num(top + ph + 16) + "\" text-anchor=\"middle\">" + num(v) +
         "</text>\n";
  o += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
       "\" fill=\"none\" stroke=\"#444\"/>\n";
  o += "<text x=\"" + num(left + pw / 2) + "\" y=\"" + num(height - 8.0) + "\" text-anchor=\"middle\">" +
       escape(c.x_label) + "</text>\n";
  o += "<text transform=\"translate(14," + num(top + ph / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
       escape(c.y_label) + "</text>\n";

  for (const auto& b : c.bands) {
    std::string pts;
    const std::size_t n = std::min({c.x.size(), b.lo.size(), b.hi.size()});
    for (std::size_t i = 0; i < n; ++i)
      if (std::isfinite(b.hi[i])) pts += num(px(c.x[i])) + "," + num(py(b.hi[i])) + " ";
    for (std::size_t i = n; i-- > 0;)
      if (std::isfinite(b.lo[i])) pts += num(px(c.x[i])) + "," + num(py(b.lo[i])) + " ";
    o += "<polygon points=\"" + pts + "\" fill=\"" + b.color + "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
  }

  double ly = top + 10;
  for (const auto& s : c.series) {
    std::string path;
    bool pen = false;
    const std::size_t n = std::min(c.x.size(), s.y.size());
    const double dx = c.x.size() > 1 ? c.x[1] - c.x[0] : 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(s.y[i])) {
        pen = false;
        continue;
      }
      path += (pen ? "L" : "M") + num(px(c.x[i])) + "," + num(py(s.y[i]));
      if (s.step) path += "L" + num(px(c.x[i] + dx)) + "," + num(py(s.y[i]));
      pen = true;
    }
    o += "<path d=\"" + path + "\" fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.6\"/>\n";
    o += "<line x1=\"" + num(left + pw + 10) + "\" x2=\"" + num(left + pw + 28) + "\" y1=\"" + num(ly) + "\" y2=\"" +
         num(ly) + "\" stroke=\"" + s.color + "\" stroke-width=\"2\"/>\n";
    o += "<text x=\"" + num(left + pw + 32) + "\" y=\"" + num(ly + 4) + "\">" + escape(s.name) + "</text>\n";
    ly += 16;
  }
  o += "</svg>\n";
  return o;
}

}  // namespace hvacdr::tools
