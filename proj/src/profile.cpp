// SPDX-License-Identifier: Apache-2.0
#include "kpzlab/profile.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "kpzlab/error.hpp"

namespace kpzlab {

const char* regime_name(Regime r) { return r == Regime::h ? "h" : "g"; }

double SpatialProfile::at(double xq) const {
  const std::size_t m = x.size();
  if (m == 0) fail(ErrorCode::domain, "empty profile");
  const double h = spacing();
  if (m == 1 || h <= 0) {
    if (xq == x[0]) return values[0];
    fail(ErrorCode::domain, "profile has a single node");
  }
  double pos = (xq - x.front()) / h;
  // tolerate round-off at the ends
  if (pos < -1e-9 || pos > double(m - 1) + 1e-9) {
    fail(ErrorCode::domain, "x = " + std::to_string(xq) +
                                " is outside the profile grid [" +
                                std::to_string(x.front()) + ", " +
                                std::to_string(x.back()) + "]");
  }
  if (pos <= 0) return values.front();
  if (pos >= double(m - 1)) return values.back();
  // snap to a node so node lookups are exact
  double r = std::round(pos);
  if (std::abs(pos - r) < 1e-9) return values[static_cast<std::size_t>(r)];
  auto j = static_cast<std::size_t>(pos);
  double f = pos - double(j);
  if (f == 0) return values[j];
  return values[j] + f * (values[j + 1] - values[j]);
}

void SpatialProfile::validate() const {
  if (x.size() != values.size())
    fail(ErrorCode::invalid_argument, "profile grid and values differ in size");
  if (x.empty()) fail(ErrorCode::invalid_argument, "profile is empty");
  const std::size_t m = x.size();
  const double h = spacing();
  for (std::size_t j = 0; j < m; ++j) {
    if (!std::isfinite(values[j]))
      fail(ErrorCode::numeric, "profile value " + std::to_string(j) +
                                   " is not finite");
    if (std::abs(x[j] + x[m - 1 - j]) > 1e-9 * (1 + std::abs(x[j])))
      fail(ErrorCode::invalid_argument, "profile grid is not symmetric");
    if (j > 0 && std::abs((x[j] - x[j - 1]) - h) > 1e-9 * (1 + h))
      fail(ErrorCode::invalid_argument, "profile grid is not uniform");
  }
}

double parabola_coefficient(Regime r, double t, double alpha) {
  if (r == Regime::h) return 1.0 / (2 * alpha);
  return std::pow(std::numbers::pi * t / 4, 0.75) / (2 * alpha * t);
}

SpatialProfile recenter(const SpatialProfile& p, bool add) {
  SpatialProfile out = p;
  double q = parabola_coefficient(p.regime, p.t, p.alpha);
  double sign = add ? 1.0 : -1.0;
  for (std::size_t j = 0; j < out.x.size(); ++j)
    out.values[j] += sign * q * out.x[j] * out.x[j];
  out.recentered = add;
  return out;
}

std::vector<double> symmetric_grid(std::size_t half_count, double spacing) {
  std::vector<double> g(2 * half_count + 1);
  for (std::size_t j = 0; j < g.size(); ++j)
    g[j] = (double(j) - double(half_count)) * spacing;
  return g;
}

}  // namespace kpzlab
