// SPDX-License-Identifier: Apache-2.0
#include "kpzlab/polymer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "kpzlab/error.hpp"
#include "kpzlab/parallel.hpp"
#include "fpenv.hpp"
#include "vexp.hpp"


namespace kpzlab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double logaddexp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

void check_n(int n) {
  if (n < 2 || n % 2 != 0)
    fail(ErrorCode::invalid_argument,
         "polymer length n must be even and >= 2, got " + std::to_string(n));
}

}  // namespace

double PolymerRun::log_z(int x) const {
  if (x < -n || x > n || ((x + n) % 2 != 0)) return kNegInf;
  return log_z_reachable[static_cast<std::size_t>((x + n) / 2)];
}

double polymer_beta(double t, int n) {
  require(t > 0, "polymer time t must be positive");
  check_n(n);
  return std::pow(t / (2.0 * n), 0.25);
}

double log_walk_probability(int n, int x) {
  if (x < -n || x > n || ((x + n) % 2 != 0)) return kNegInf;
  int up = (n + x) / 2;
  return std::lgamma(n + 1.0) - std::lgamma(up + 1.0) -
         std::lgamma(n - up + 1.0) - n * std::numbers::ln2;
}

double log_mean_z(int n, double beta) {
  return n * beta * beta / 2 + log_walk_probability(n, 0);
}

PolymerRun run_polymer(int n, double beta, const RngStream& stream) {
  check_n(n);
  require(beta >= 0 && std::isfinite(beta), "beta must be >= 0");
  auto env = make_environment(n, stream);
  std::vector<double> prev{0.0}, cur, noise(static_cast<std::size_t>(n) + 1);
  for (int i = 1; i <= n; ++i) {
    env.row(i, -i, i + 1, noise.data());
    cur.assign(static_cast<std::size_t>(i) + 1, kNegInf);
    for (int k = 0; k <= i; ++k) {
      double left = k >= 1 ? prev[k - 1] : kNegInf;  // from x - 1
      double right = k <= i - 1 ? prev[k] : kNegInf; // from x + 1
      cur[k] = beta * noise[k] + logaddexp(left, right) - std::numbers::ln2;
    }
    prev.swap(cur);
  }
  PolymerRun run;
  run.n = n;
  run.beta = beta;
  run.env_stream = stream;
  run.log_z_reachable = std::move(prev);
  return run;
}

std::vector<double> pinned_log_z(int n, double beta, int y_max,
                                 const RngStream& stream) {
  check_n(n);
  require(beta >= 0 && std::isfinite(beta), "beta must be >= 0");
  require(y_max >= 0 && y_max % 2 == 0 && y_max <= n,
          "window half-width must be even and at most n");
  detail::DenormalGuard guard;
  auto env = make_environment(n, stream);
  // Row i holds x in [lo_i, hi_i] step 2 with |x| <= min(i, n - i + y_max).
  // buf[k] <-> x = -i + 2k on row i (indices relative to the full row).
  // Buffers are offset by one so that index k lives at k + 1 and the
  // neighbours just outside the previous window can be zeroed.
  std::vector<double> w_prev(static_cast<std::size_t>(n) + 3, 0.0);
  std::vector<double> w_cur(w_prev.size(), 0.0);
  std::vector<double> noise(w_prev.size());
  w_prev[1] = 1.0;
  int k_lo_prev = 0, k_hi_prev = 0;
  double log_scale = 0;
  for (int i = 1; i <= n; ++i) {
    int reach = std::min(i, n - i + y_max);
    int k_lo = (i - reach) / 2;
    int k_hi = (i + reach) / 2;
    int len = k_hi - k_lo + 1;
    env.row(i, -i + 2 * k_lo, len, noise.data());
    // Predecessors of index k are k-1 and k on row i-1.
    w_prev[static_cast<std::size_t>(k_lo_prev)] = 0.0;
    w_prev[static_cast<std::size_t>(k_hi_prev) + 2] = 0.0;
    double* __restrict cur = w_cur.data() + 1 + k_lo;
    const double* __restrict prv = w_prev.data() + 1 + k_lo;
    const double* __restrict nz = noise.data();
    const double hb = 0.5;
    for (int j = 0; j < len; ++j)
      cur[j] = detail::vexp(beta * nz[j]) * hb * (prv[j - 1] + prv[j]);
    if ((i & 7) == 0 || i == n) {
      double mx = 0;
      for (int j = 0; j < len; ++j) mx = std::max(mx, cur[j]);
      if (!(mx > 0) || !std::isfinite(mx))
        fail(ErrorCode::numeric, "polymer weights degenerated at step " +
                                     std::to_string(i));
      double inv = 1.0 / mx;
      for (int j = 0; j < len; ++j) cur[j] *= inv;
      log_scale += std::log(mx);
    }
    w_prev.swap(w_cur);
    k_lo_prev = k_lo;
    k_hi_prev = k_hi;
  }
  std::vector<double> out(static_cast<std::size_t>(y_max) + 1);
  for (int y = -y_max, j = 0; y <= y_max; y += 2, ++j) {
    double v = w_prev[static_cast<std::size_t>((y + n) / 2) + 1];
    out[static_cast<std::size_t>(j)] = v > 0 ? std::log(v) + log_scale : kNegInf;
  }
  return out;
}

double g_statistic(double t, int n, double log_z0) {
  double beta = polymer_beta(t, n);
  return (log_z0 - log_mean_z(n, beta)) /
         std::pow(std::numbers::pi * t / 2, 0.25);
}

GSample sample_g(double t, int n, const RngStream& stream) {
  GSample g;
  g.t = t;
  g.n = n;
  g.beta = polymer_beta(t, n);
  double lz = pinned_log_z(n, g.beta, 0, stream)[0];
  g.value = g_statistic(t, n, lz);
  if (!std::isfinite(g.value))
    fail(ErrorCode::numeric, "non-finite polymer statistic");
  return g;
}

std::vector<double> sample_g_batch(double t, int n, const RngStream& stream,
                                   std::size_t replicas, unsigned threads) {
  polymer_beta(t, n);  // validates
  std::vector<double> out(replicas);
  parallel_for(replicas, threads, [&](std::size_t r) {
    out[r] = sample_g(t, n, stream.child(r)).value;
  });
  return out;
}

SpatialProfile spatial_profile_g(double t, int n, double grid_halfwidth,
                                 const RngStream& stream,
                                 double beta_override) {
  double beta = polymer_beta(t, n);
  if (beta_override >= 0) beta = beta_override;
  require(grid_halfwidth >= 0, "grid half-width must be >= 0");
  // x = 2y / sqrt(pi n)
  const double unit = 2.0 / std::sqrt(std::numbers::pi * n);
  double y_real = grid_halfwidth / unit;
  if (y_real > n + 1e-9)
    fail(ErrorCode::domain, "profile grid half-width " +
                                std::to_string(grid_halfwidth) +
                                " exceeds the polymer range " +
                                std::to_string(n * unit));
  int y_max = static_cast<int>(std::floor(y_real + 1e-9));
  y_max -= y_max % 2;
  auto lz = pinned_log_z(n, beta, y_max, stream);
  SpatialProfile p;
  p.regime = Regime::g;
  p.t = 2 * t;
  p.alpha = 1;
  const double scale = std::pow(std::numbers::pi * t / 2, -0.25);
  const double centre = log_mean_z(n, beta);
  for (int y = -y_max, j = 0; y <= y_max; y += 2, ++j) {
    p.x.push_back(y * unit);
    p.values.push_back((lz[static_cast<std::size_t>(j)] - centre) * scale);
  }
  p.x[static_cast<std::size_t>(y_max / 2)] = 0.0;
  p.validate();
  return p;
}

SpatialProfile spatial_profile_h(double t_scale, double alpha, int n,
                                 double grid_halfwidth,
                                 const RngStream& stream) {
  require(t_scale > 0 && alpha > 0, "t and alpha must be positive");
  check_n(n);
  const double T = alpha * t_scale;
  const double beta = polymer_beta(T / 2, n);
  const double dX = std::sqrt(T / n);  // physical length of one lattice unit
  const double t13 = std::cbrt(t_scale);
  const double unit = dX / (t13 * t13);
  double y_real = grid_halfwidth / unit;
  if (y_real > n + 1e-9)
    fail(ErrorCode::domain, "profile grid half-width " +
                                std::to_string(grid_halfwidth) +
                                " exceeds the polymer range " +
                                std::to_string(n * unit));
  int y_max = static_cast<int>(std::floor(y_real + 1e-9));
  y_max -= y_max % 2;
  auto lz = pinned_log_z(n, beta, y_max, stream);
  SpatialProfile p;
  p.regime = Regime::h;
  p.t = t_scale;
  p.alpha = alpha;
  // Parity sites are 2 dX apart, so Z_n(y) e^{-n beta^2/2} / (2 dX)
  // approximates the continuum density Z(T, X).
  const double shift = -n * beta * beta / 2 - std::log(2 * dX) + T / 24;
  for (int y = -y_max, j = 0; y <= y_max; y += 2, ++j) {
    p.x.push_back(y * unit);
    p.values.push_back((lz[static_cast<std::size_t>(j)] + shift) / t13);
  }
  p.x[static_cast<std::size_t>(y_max / 2)] = 0.0;
  p.validate();
  return p;
}

double two_replica_overlap(int n, double beta, const RngStream& stream) {
  check_n(n);
  require(beta >= 0 && std::isfinite(beta), "beta must be >= 0");
  if (n > kOverlapMaxN)
    fail(ErrorCode::size, "two-replica overlap is capped at n = " +
                              std::to_string(kOverlapMaxN) + ", got " +
                              std::to_string(n));
  auto env = make_environment(n, stream);
  // Rows are stored with index k <-> x = -i + 2k.
  std::vector<std::vector<double>> noise(static_cast<std::size_t>(n) + 1);
  for (int i = 1; i <= n; ++i) {
    noise[i].resize(static_cast<std::size_t>(i) + 1);
    env.row(i, -i, i + 1, noise[i].data());
  }
  // Forward: log F_i(x) includes the weight at (i, x).
  std::vector<std::vector<double>> logF(static_cast<std::size_t>(n) + 1);
  logF[0] = {0.0};
  for (int i = 1; i <= n; ++i) {
    logF[i].assign(static_cast<std::size_t>(i) + 1, kNegInf);
    for (int k = 0; k <= i; ++k) {
      double a = k >= 1 ? logF[i - 1][k - 1] : kNegInf;
      double b = k <= i - 1 ? logF[i - 1][k] : kNegInf;
      logF[i][k] = beta * noise[i][k] + logaddexp(a, b) - std::numbers::ln2;
    }
  }
  const double log_z = logF[n][static_cast<std::size_t>(n / 2)];
  // Backward: log B_i(x) = log E_x[weights after i, S_n = 0].
  std::vector<double> logB_next(static_cast<std::size_t>(n) + 1, kNegInf);
  logB_next[static_cast<std::size_t>(n / 2)] = 0.0;
  double acc = 0;
  {
    double v = 2 * (logF[n][n / 2] + 0.0 - log_z);
    acc += std::exp(v);
  }
  for (int i = n - 1; i >= 1; --i) {
    std::vector<double> logB(static_cast<std::size_t>(i) + 1, kNegInf);
    for (int k = 0; k <= i; ++k) {
      // x -> x+1 is index k+1 on row i+1, x -> x-1 is index k
      double up = logB_next[k + 1] + beta * noise[i + 1][k + 1];
      double dn = logB_next[k] + beta * noise[i + 1][k];
      logB[k] = logaddexp(up, dn) - std::numbers::ln2;
      double v = logF[i][k] + logB[k];
      if (v != kNegInf) acc += std::exp(2 * (v - log_z));
    }
    logB_next.assign(static_cast<std::size_t>(n) + 1, kNegInf);
    std::copy(logB.begin(), logB.end(), logB_next.begin());
  }
  return acc;
}

}  // namespace kpzlab
