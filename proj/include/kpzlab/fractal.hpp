// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace kpzlab {

struct PointSet {
  std::vector<double> points;  // sorted, distinct, all >= 1
  // provenance
  std::string gauge;
  double level = 0;
  std::string source;

  std::size_t size() const { return points.size(); }
  void validate() const;
};

// Sorts and deduplicates; rejects values below 1.
PointSet make_point_set(std::vector<double> values);

// Points of shell n, both halves (-e^{n+1}, -e^n] and [e^n, e^{n+1}), in
// increasing order.
std::vector<double> shell_points(const std::vector<double>& points, int n);

// Shells above this many points are coarsened to unit-cell occupancy
// before the cover DP.
constexpr std::size_t kExactShellLimit = 10000;

// nu_{n,rho}: the least sum of (Length(Q_i)/e^n)^rho over covers of shell
// n by intervals of length >= 1. Exact O(m^2) DP over contiguous clusters.
double shell_content(const std::vector<double>& points, int n, double rho);

enum class DimensionMethod { regression, bisection, bounded };
const char* dimension_method_name(DimensionMethod m);

struct ShellContent {
  int n = 0;
  std::size_t count = 0;
  std::vector<double> nu;  // one per rho in HausdorffReport::rhos
};

struct ThicknessShell {
  int n = 0;
  bool pass = false;
  std::size_t windows = 0;
  std::size_t empty_windows = 0;
};

struct ThicknessCertificate {
  double theta = 0;
  std::vector<ThicknessShell> shells;
  bool pass = false;          // every shell passes
  double implied_lower = 0;   // 1 - theta on pass, else 0
};

struct HausdorffReport {
  int n0 = 4, n1 = 4;
  std::vector<double> rhos;
  std::vector<ShellContent> shells;
  DimensionMethod method = DimensionMethod::regression;
  double dimension = 0;        // regression estimate, clipped to [0, 1]
  double ci_low = 0, ci_high = 0;
  double bisection = 0;        // growth/decay transition in rho
  bool disagree = false;       // |regression - bisection| > 0.1
  std::size_t nonempty_shells = 0;
};

// Regression: 1 + slope of log nu_{n,1} on n over the nonempty shells,
// with a 95% CI from the residuals. Bisection: the least rho at which the
// fitted slope of log nu_{n,rho} drops below -0.02. A set with no points in
// shells n0..n1 is bounded there and gets 0; otherwise at least 5
// nonempty shells are needed.
HausdorffReport estimate_dimension(const std::vector<double>& points, int n0,
                                   int n1,
                                   std::vector<double> rhos = {0.25, 0.5,
                                                               0.75, 1.0});

// Pi_n(theta) = {e^n + j e^{n theta} : 0 <= j <= e^{n(1-theta)+1} -
// e^{n(1-theta)}}; shell n passes when every window [x, x + e^{theta n}]
// with x in Pi_n(theta) meets the set.
std::vector<double> thickness_grid(int n, double theta);
ThicknessCertificate thickness_check(const std::vector<double>& points,
                                     double theta, int m, int n);

// e^{-n rho} mu(E) / K with K the largest mu(Q) / Leb(Q)^rho over
// intervals Q of length >= 1 in the shell. The Leb^rho normalisation keeps
// the bound valid for rho < 1. weights[i] belongs to points[i].
double frostman_lower(const std::vector<double>& points,
                      const std::vector<double>& weights, int n, double rho);

enum class Gauge { loglog_two_thirds, loglog_one_third, exp_time };
const char* gauge_name(Gauge g);
Gauge parse_gauge(const std::string& s);

// {t >= e^e : value(t) / gauge(t) >= gamma}. The exp-time gauge works in
// s = log t: {s >= e^e : value(e^s) / ((3/(4 sqrt 2))^{2/3} (log s)^{2/3})
// >= gamma}, gamma in [0, 1], and returns the s values.
PointSet extract_level_set(const std::vector<double>& times,
                           const std::vector<double>& values, Gauge gauge,
                           double gamma);

}  // namespace kpzlab
