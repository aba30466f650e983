// SPDX-License-Identifier: Apache-2.0
#include "kpzlab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "kpzlab/csv.hpp"
#include "kpzlab/error.hpp"

namespace kpzlab {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

double nice_step(double span, int target) {
  double raw = span / target;
  double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double f = raw / mag;
  double nice = f < 1.5 ? 1 : f < 3 ? 2 : f < 7 ? 5 : 10;
  return nice * mag;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

std::string render_svg(const PlotSpec& spec) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0;
  double y0 = x0, y1 = -x0;
  std::size_t finite = 0;
  for (const auto& s : spec.series) {
    require(s.x.size() == s.y.size(), "series x and y differ in length");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      ++finite;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (finite == 0) fail(ErrorCode::invalid_argument, "nothing to plot");
  for (const auto& h : spec.levels) {
    y0 = std::min(y0, h.y);
    y1 = std::max(y1, h.y);
  }
  if (x1 == x0) { x0 -= 0.5; x1 += 0.5; }
  if (y1 == y0) { y0 -= 0.5; y1 += 0.5; }
  double padx = 0.04 * (x1 - x0), pady = 0.06 * (y1 - y0);
  x0 -= padx; x1 += padx; y0 -= pady; y1 += pady;

  const double W = spec.width, H = spec.height;
  const double L = 70, R = 20, T = 40, B = 55;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
     << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << ' ' << H
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<defs><clipPath id=\"plot\"><rect x=\"" << L << "\" y=\"" << T
     << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
     << "\"/></clipPath></defs>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" "
        "font-size=\"14\">" << escape(spec.title) << "</text>\n";

  // axes and ticks
  os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R
     << "\" height=\"" << H - T - B
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  double sx = nice_step(x1 - x0, 6);
  for (double v = std::ceil(x0 / sx) * sx; v <= x1; v += sx) {
    double X = px(v);
    os << "<line x1=\"" << X << "\" y1=\"" << H - B << "\" x2=\"" << X
       << "\" y2=\"" << H - B + 5 << "\" stroke=\"black\"/>"
       << "<text x=\"" << X << "\" y=\"" << H - B + 18
       << "\" text-anchor=\"middle\">" << num(std::abs(v) < 1e-12 * sx ? 0 : v)
       << "</text>\n";
  }
  double sy = nice_step(y1 - y0, 6);
  for (double v = std::ceil(y0 / sy) * sy; v <= y1; v += sy) {
    double Y = py(v);
    os << "<line x1=\"" << L - 5 << "\" y1=\"" << Y << "\" x2=\"" << L
       << "\" y2=\"" << Y << "\" stroke=\"black\"/>"
       << "<text x=\"" << L - 8 << "\" y=\"" << Y + 4
       << "\" text-anchor=\"end\">" << num(std::abs(v) < 1e-12 * sy ? 0 : v)
       << "</text>\n";
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12
     << "\" text-anchor=\"middle\">" << escape(spec.xlabel) << "</text>\n";
  os << "<text transform=\"translate(16 " << (T + H - B) / 2
     << ") rotate(-90)\" text-anchor=\"middle\">" << escape(spec.ylabel)
     << "</text>\n";

  os << "<g clip-path=\"url(#plot)\">\n";
  std::vector<std::pair<std::string, std::string>> legend;  // label, style
  for (const auto& h : spec.levels) {
    os << "<line x1=\"" << L << "\" y1=\"" << py(h.y) << "\" x2=\"" << W - R
       << "\" y2=\"" << py(h.y)
       << "\" stroke=\"#555\" stroke-dasharray=\"6 4\"/>\n";
    legend.emplace_back(h.label, "stroke=\"#555\" stroke-dasharray=\"6 4\"");
  }
  for (const auto& r : spec.references) {
    os << "<line x1=\"" << px(x0) << "\" y1=\"" << py(r.intercept + r.slope * x0)
       << "\" x2=\"" << px(x1) << "\" y2=\"" << py(r.intercept + r.slope * x1)
       << "\" stroke=\"#777\" stroke-dasharray=\"2 3\"/>\n";
    legend.emplace_back(r.label, "stroke=\"#777\" stroke-dasharray=\"2 3\"");
  }
  for (std::size_t k = 0; k < spec.series.size(); ++k) {
    const auto& s = spec.series[k];
    const char* col = kPalette[k % 6];
    if (s.line) {
      os << "<polyline fill=\"none\" stroke=\"" << col << "\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i)
        if (std::isfinite(s.x[i]) && std::isfinite(s.y[i]))
          os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
      os << "\"/>\n";
    } else {
      for (std::size_t i = 0; i < s.x.size(); ++i)
        if (std::isfinite(s.x[i]) && std::isfinite(s.y[i]))
          os << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i])
             << "\" r=\"2.5\" fill=\"" << col << "\"/>\n";
    }
    legend.emplace_back(s.label, std::string("stroke=\"") + col +
                                     "\" stroke-width=\"3\"");
  }
  os << "</g>\n";

  double ly = T + 14;
  for (const auto& [label, style] : legend) {
    if (label.empty()) continue;
    os << "<line x1=\"" << L + 10 << "\" y1=\"" << ly - 4 << "\" x2=\""
       << L + 34 << "\" y2=\"" << ly - 4 << "\" " << style << "/>"
       << "<text x=\"" << L + 40 << "\" y=\"" << ly << "\">" << escape(label)
       << "</text>\n";
    ly += 16;
  }
  os << "</svg>\n";
  return os.str();
}

void emit_plot(const PlotSpec& spec, const std::string& path) {
  write_text(path, render_svg(spec));
}

}  // namespace kpzlab
