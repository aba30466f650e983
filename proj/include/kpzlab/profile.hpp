// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

namespace kpzlab {

// h: long-time 1:2:3 scaling. g: short-time scaling.
enum class Regime { h, g };

const char* regime_name(Regime r);

// Scaled height curve on a uniform grid symmetric about 0: h_t(alpha, .) or
// g_t(alpha, .). `t` is the scale parameter, so the KPZ time of the field
// is alpha * t.
struct SpatialProfile {
  Regime regime = Regime::h;
  double t = 1;
  double alpha = 1;
  std::vector<double> x;
  std::vector<double> values;
  bool recentered = false;

  std::size_t size() const { return x.size(); }
  double spacing() const { return x.size() > 1 ? x[1] - x[0] : 0.0; }
  double half_width() const { return x.empty() ? 0.0 : x.back(); }
  //! Linear interpolation; throws outside the grid.
  double at(double xq) const;
  //! Throws unless the grid is uniform, symmetric and values finite.
  void validate() const;
};

// Coefficient q of the parabola q*x^2 that makes the profile stationary in
// x: 1/(2 alpha) for h, (pi t/4)^{3/4}/(2 alpha t) for g.
double parabola_coefficient(Regime r, double t, double alpha);

// Adds (recentered = true) or removes the stationarity parabola.
SpatialProfile recenter(const SpatialProfile& p, bool add = true);

// Uniform symmetric grid with 2*half_count+1 points and the given spacing.
std::vector<double> symmetric_grid(std::size_t half_count, double spacing);

}  // namespace kpzlab
