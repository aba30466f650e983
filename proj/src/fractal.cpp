// SPDX-License-Identifier: Apache-2.0
#include "kpzlab/fractal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/distributions/students_t.hpp>

#include "kpzlab/error.hpp"

namespace kpzlab {

namespace {

// Slope below which log nu_{n,rho} counts as decaying in n.
constexpr double kDecaySlope = -0.02;
constexpr std::size_t kFrostmanLimit = 4 * kExactShellLimit;

struct Seg {
  double lo, hi;
};

// Shell points as segments; past the exact limit, occupied unit cells
// merged into runs (a split run never beats covering it whole).
std::vector<Seg> shell_segments(const std::vector<double>& pts) {
  std::vector<Seg> segs;
  if (pts.size() <= kExactShellLimit) {
    segs.reserve(pts.size());
    for (double p : pts) segs.push_back({p, p});
    return segs;
  }
  double cell_prev = std::numeric_limits<double>::quiet_NaN();
  for (double p : pts) {
    double c = std::floor(p);
    if (c == cell_prev) continue;
    if (!segs.empty() && segs.back().hi == c)
      segs.back().hi = c + 1;
    else
      segs.push_back({c, c + 1});
    cell_prev = c;
  }
  return segs;
}

double cover_dp(const std::vector<Seg>& s, double scale, double rho) {
  const std::size_t m = s.size();
  if (m == 0) return 0;
  std::vector<double> dp(m + 1, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = j + 1; i-- > 0;) {
      double len = std::max(s[j].hi - s[i].lo, 1.0);
      double c = std::pow(len / scale, rho);
      // costs only grow as the cluster extends left
      if (c >= best) break;
      best = std::min(best, dp[i] + c);
    }
    dp[j + 1] = best;
  }
  return dp[m];
}

struct Fit {
  double slope = 0, se = 0;
  std::size_t k = 0;
};

Fit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  Fit f;
  f.k = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < f.k; ++i) { mx += x[i]; my += y[i]; }
  mx /= f.k;
  my /= f.k;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < f.k; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  f.slope = sxy / sxx;
  double rss = 0;
  for (std::size_t i = 0; i < f.k; ++i) {
    double r = y[i] - my - f.slope * (x[i] - mx);
    rss += r * r;
  }
  f.se = f.k > 2 ? std::sqrt(rss / (f.k - 2) / sxx) : 0;
  return f;
}

}  // namespace

void PointSet::validate() const {
  for (std::size_t i = 0; i < points.size(); ++i) {
    require(std::isfinite(points[i]) && points[i] >= 1,
            "point sets live in [1, inf)");
    require(i == 0 || points[i] > points[i - 1],
            "point set must be sorted and distinct");
  }
}

PointSet make_point_set(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  PointSet s;
  s.points = std::move(values);
  s.validate();
  return s;
}

std::vector<double> shell_points(const std::vector<double>& points, int n) {
  const double lo = std::exp(double(n)), hi = std::exp(double(n + 1));
  std::vector<double> out;
  for (double p : points)
    if ((p >= lo && p < hi) || (p > -hi && p <= -lo)) out.push_back(p);
  std::sort(out.begin(), out.end());
  return out;
}

double shell_content(const std::vector<double>& points, int n, double rho) {
  require(rho > 0 && rho <= 1, "rho must lie in (0, 1]");
  auto pts = shell_points(points, n);
  return cover_dp(shell_segments(pts), std::exp(double(n)), rho);
}

const char* dimension_method_name(DimensionMethod m) {
  switch (m) {
    case DimensionMethod::regression: return "regression";
    case DimensionMethod::bisection: return "bisection";
    case DimensionMethod::bounded: return "bounded";
  }
  return "?";
}

HausdorffReport estimate_dimension(const std::vector<double>& points, int n0,
                                   int n1, std::vector<double> rhos) {
  require(n0 >= 0 && n1 >= n0, "need shells 0 <= n0 <= n1");
  if (std::find(rhos.begin(), rhos.end(), 1.0) == rhos.end())
    rhos.push_back(1.0);
  std::sort(rhos.begin(), rhos.end());
  for (double r : rhos) require(r > 0 && r <= 1, "rho must lie in (0, 1]");

  HausdorffReport rep;
  rep.n0 = n0;
  rep.n1 = n1;
  rep.rhos = rhos;
  std::vector<std::vector<Seg>> segs;
  std::vector<int> ns;
  for (int n = n0; n <= n1; ++n) {
    auto pts = shell_points(points, n);
    ShellContent sc;
    sc.n = n;
    sc.count = pts.size();
    auto s = shell_segments(pts);
    for (double r : rhos) sc.nu.push_back(cover_dp(s, std::exp(double(n)), r));
    rep.shells.push_back(sc);
    if (!pts.empty()) {
      ++rep.nonempty_shells;
      segs.push_back(std::move(s));
      ns.push_back(n);
    }
  }
  if (rep.nonempty_shells == 0) {
    rep.method = DimensionMethod::bounded;
    return rep;
  }
  if (rep.nonempty_shells < 5)
    fail(ErrorCode::size, "dimension estimate needs at least 5 nonempty "
                          "shells, got " +
                              std::to_string(rep.nonempty_shells));

  auto slope_at = [&](double rho) {
    std::vector<double> x, y;
    for (std::size_t i = 0; i < segs.size(); ++i) {
      x.push_back(ns[i]);
      y.push_back(std::log(cover_dp(segs[i], std::exp(double(ns[i])), rho)));
    }
    return fit_line(x, y);
  };

  Fit f1 = slope_at(1.0);
  double q = 0;
  if (f1.k > 2) {
    boost::math::students_t dist(double(f1.k - 2));
    q = boost::math::quantile(boost::math::complement(dist, 0.025));
  }
  rep.method = DimensionMethod::regression;
  rep.dimension = std::clamp(1 + f1.slope, 0.0, 1.0);
  rep.ci_low = std::clamp(1 + f1.slope - q * f1.se, 0.0, 1.0);
  rep.ci_high = std::clamp(1 + f1.slope + q * f1.se, 0.0, 1.0);

  // least rho where the contents decay
  double lo = 1e-3, hi = 1.0;
  if (slope_at(hi).slope >= kDecaySlope) {
    rep.bisection = 1;
  } else if (slope_at(lo).slope < kDecaySlope) {
    rep.bisection = 0;
  } else {
    for (int it = 0; it < 16; ++it) {
      double mid = 0.5 * (lo + hi);
      if (slope_at(mid).slope < kDecaySlope) hi = mid; else lo = mid;
    }
    rep.bisection = 0.5 * (lo + hi);
  }
  rep.disagree = std::abs(rep.dimension - rep.bisection) > 0.1;
  return rep;
}

std::vector<double> thickness_grid(int n, double theta) {
  require(theta > 0 && theta < 1, "theta must lie in (0, 1)");
  const double en = std::exp(double(n));
  const double step = std::exp(theta * n);
  const double a = std::exp(n * (1 - theta));
  const long jmax = static_cast<long>(std::floor(a * std::numbers::e - a));
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(jmax) + 1);
  for (long j = 0; j <= jmax; ++j) out.push_back(en + double(j) * step);
  return out;
}

ThicknessCertificate thickness_check(const std::vector<double>& points,
                                     double theta, int m, int n) {
  require(theta > 0 && theta < 1, "theta must lie in (0, 1)");
  require(m <= n, "need shells m <= n");
  std::vector<double> pts(points);
  std::sort(pts.begin(), pts.end());
  ThicknessCertificate cert;
  cert.theta = theta;
  cert.pass = true;
  for (int k = m; k <= n; ++k) {
    ThicknessShell sh;
    sh.n = k;
    const double w = std::exp(theta * k);
    for (double x : thickness_grid(k, theta)) {
      ++sh.windows;
      auto it = std::lower_bound(pts.begin(), pts.end(), x);
      if (it == pts.end() || *it > x + w) ++sh.empty_windows;
    }
    sh.pass = sh.empty_windows == 0;
    cert.pass = cert.pass && sh.pass;
    cert.shells.push_back(sh);
  }
  cert.implied_lower = cert.pass ? 1 - theta : 0;
  return cert;
}

double frostman_lower(const std::vector<double>& points,
                      const std::vector<double>& weights, int n, double rho) {
  require(points.size() == weights.size(), "one weight per point");
  require(rho > 0 && rho <= 1, "rho must lie in (0, 1]");
  const double lo = std::exp(double(n)), hi = std::exp(double(n + 1));
  std::vector<std::pair<double, double>> pw;
  for (std::size_t i = 0; i < points.size(); ++i) {
    require(weights[i] >= 0 && std::isfinite(weights[i]),
            "weights must be nonnegative");
    double p = points[i];
    if (((p >= lo && p < hi) || (p > -hi && p <= -lo)) && weights[i] > 0)
      pw.emplace_back(p, weights[i]);
  }
  if (pw.empty()) return 0;
  if (pw.size() > kFrostmanLimit)
    fail(ErrorCode::size, "frostman_lower supports up to " +
                              std::to_string(kFrostmanLimit) +
                              " weighted points per shell");
  std::sort(pw.begin(), pw.end());
  double total = 0;
  for (auto& e : pw) total += e.second;
  double K = 0;
  for (std::size_t i = 0; i < pw.size(); ++i) {
    double mass = 0;
    for (std::size_t j = i; j < pw.size(); ++j) {
      mass += pw[j].second;
      double len = std::max(pw[j].first - pw[i].first, 1.0);
      K = std::max(K, mass / std::pow(len, rho));
    }
  }
  return std::exp(-n * rho) * total / K;
}

const char* gauge_name(Gauge g) {
  switch (g) {
    case Gauge::loglog_two_thirds: return "loglog23";
    case Gauge::loglog_one_third: return "loglog13";
    case Gauge::exp_time: return "exptime";
  }
  return "?";
}

Gauge parse_gauge(const std::string& s) {
  if (s == "loglog23") return Gauge::loglog_two_thirds;
  if (s == "loglog13") return Gauge::loglog_one_third;
  if (s == "exptime") return Gauge::exp_time;
  fail(ErrorCode::invalid_argument,
       "unknown gauge '" + s + "' (loglog23, loglog13, exptime)");
}

PointSet extract_level_set(const std::vector<double>& times,
                           const std::vector<double>& values, Gauge gauge,
                           double gamma) {
  require(times.size() == values.size(), "one value per time");
  require(!std::isnan(gamma), "gamma is NaN");
  const double ee = std::exp(std::numbers::e);
  const double c = std::pow(3 / (4 * std::numbers::sqrt2), 2.0 / 3);
  std::vector<double> keep;
  for (std::size_t i = 0; i < times.size(); ++i) {
    double t = times[i];
    double stat;
    double at = t;
    if (gauge == Gauge::exp_time) {
      double s = std::log(t);
      if (!(s >= ee))
        fail(ErrorCode::domain,
             "the exp-time gauge needs log t >= e^e, got t = " +
                 std::to_string(t));
      stat = values[i] / (c * std::pow(std::log(s), 2.0 / 3));
      at = s;
    } else {
      if (!(t >= ee))
        fail(ErrorCode::domain,
             "loglog gauges need t >= e^e, got t = " + std::to_string(t));
      double ll = std::log(std::log(t));
      stat = values[i] /
             std::pow(ll, gauge == Gauge::loglog_two_thirds ? 2.0 / 3 : 1.0 / 3);
    }
    if (stat >= gamma) keep.push_back(at);
  }
  PointSet ps = make_point_set(std::move(keep));
  ps.gauge = gauge_name(gauge);
  ps.level = gamma;
  return ps;
}

}  // namespace kpzlab
