// SPDX-License-Identifier: Apache-2.0
#include "kpzlab/composition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/special_functions/erf.hpp>

#include "kpzlab/error.hpp"
#include "kpzlab/parallel.hpp"
#include "kpzlab/polymer.hpp"
#include "kpzlab/she.hpp"

namespace kpzlab {

ComposeDetail compose_detail(const SpatialProfile& f, const SpatialProfile& g,
                             double t, double L, double tail_tol) {
  if (!(t > 0) || !std::isfinite(t)) fail(ErrorCode::domain, "t must be positive");
  if (f.regime != Regime::h || g.regime != Regime::h)
    fail(ErrorCode::invalid_argument, "composition takes h-regime profiles");
  if (!(tail_tol > 0 && tail_tol < 1))
    fail(ErrorCode::invalid_argument, "tail tolerance must lie in (0, 1)");
  f.validate();
  g.validate();
  const double t13 = std::cbrt(t), t23 = t13 * t13;
  const double h = t23 * std::min(f.spacing(), g.spacing());
  const double cover = t23 * std::min(f.half_width(), g.half_width());
  // Gaussian envelope exp(-kappa y^2) of the integrand
  const double kappa = (1 / (2 * f.alpha) + 1 / (2 * g.alpha)) / t;
  const double L_env = boost::math::erfc_inv(tail_tol) / std::sqrt(kappa);
  if (L == 0) {
    L = L_env;
    if (L > cover * (1 + 1e-12))
      fail(ErrorCode::domain,
           "profiles cover |y| <= " + std::to_string(cover) +
               " but the parabolic envelope needs L >= " + std::to_string(L_env));
  } else if (!(L > 0) || L > cover * (1 + 1e-12)) {
    fail(ErrorCode::domain, "L = " + std::to_string(L) + " exceeds the profile coverage " +
                                std::to_string(cover) + " (need L >= " +
                                std::to_string(L_env) + ")");
  }
  auto m = static_cast<long>(std::floor(L / h * (1 + 1e-12)));
  if (m < 2) fail(ErrorCode::size, "fewer than five quadrature nodes");

  auto logint = [&](long j) {
    double x = double(j) * h / t23;
    x = std::clamp(x, -f.half_width(), f.half_width());
    double xg = std::clamp(-x, -g.half_width(), g.half_width());
    return t13 * (f.at(x) + g.at(xg));
  };
  std::vector<double> v(static_cast<std::size_t>(2 * m + 1));
  double vmax = -std::numeric_limits<double>::infinity();
  for (long j = -m; j <= m; ++j) {
    double e = logint(j);
    v[static_cast<std::size_t>(j + m)] = e;
    vmax = std::max(vmax, e);
  }
  // pairwise sums (j, -j) keep I_t(f, g) = I_t(g o neg, f o neg) exact
  auto w = [&](long j) { return std::exp(v[static_cast<std::size_t>(j + m)] - vmax); };
  double s = w(0);
  for (long j = 1; j < m; ++j) s += w(j) + w(-j);
  s += 0.5 * (w(m) + w(-m));
  s *= h;

  ComposeDetail d;
  d.L = double(m) * h;
  d.spacing = h;
  d.nodes = v.size();
  // mass beyond the ends from the end values and the envelope slope
  double tail = (w(m) + w(-m)) / (2 * kappa * d.L);
  d.tail_fraction = tail / s;
  if (d.tail_fraction > tail_tol && L_env < d.L)
    fail(ErrorCode::numeric, "integrand has not decayed at |y| = " + std::to_string(d.L) +
                                 " (tail fraction " + std::to_string(d.tail_fraction) + ")");
  d.value = (vmax + std::log(s)) / t13;
  return d;
}

double compose(const SpatialProfile& f, const SpatialProfile& g, double t, double L) {
  return compose_detail(f, g, t, L).value;
}

namespace {

SheGrid source_grid(const SourceConfig& src, double horizon, double half_width) {
  SheGrid g = make_she_grid(horizon, src.dx, src.dt_ratio);
  g.half_width = std::ceil(half_width / src.dx) * src.dx;
  return g.resolved();
}

// h_tau-scaled profile of a field Z(T, X) on nodes X = j dx.
SpatialProfile field_profile(const std::vector<double>& z, double dx, double tau,
                             double alpha, double T) {
  SpatialProfile p;
  p.regime = Regime::h;
  p.t = tau;
  p.alpha = alpha;
  double c = std::cbrt(tau);
  long J = static_cast<long>(z.size() / 2);
  long m = static_cast<long>(positive_half_support(z));
  for (long j = -m; j <= m; ++j) {
    double v = z[static_cast<std::size_t>(j + J)];
    p.x.push_back(double(j) * dx / (c * c));
    p.values.push_back((std::log(v) + T / 24) / c);
  }
  return p;
}

}  // namespace

SpatialProfile sample_profile(const SourceConfig& src, double t, double alpha,
                              const RngStream& stream) {
  if (!(t > 0) || !(alpha > 0)) fail(ErrorCode::domain, "t and alpha must be positive");
  if (!(src.coverage >= 6)) fail(ErrorCode::invalid_argument, "coverage must be >= 6");
  double T = alpha * t;
  if (src.kind == ProfileSource::she) {
    SheGrid g = source_grid(src, T, src.coverage * std::sqrt(T));
    return sample_h_profile(t, alpha, g, stream);
  }
  double c = std::cbrt(t);
  return spatial_profile_h(t, alpha, src.polymer_n, src.coverage * std::sqrt(T) / (c * c) * 0.999,
                           stream);
}

double compose_one_point(double t, double alpha, const SourceConfig& src,
                         const RngStream& stream) {
  if (!(alpha > 1)) fail(ErrorCode::domain, "alpha must exceed 1");
  auto f = sample_profile(src, t, 1.0, stream.child(0));
  auto g = sample_profile(src, t, alpha - 1, stream.child(1));
  return compose(f, g, t);
}

CompositionChain sample_chain(double t, const std::vector<double>& alphas,
                              const SourceConfig& src, const RngStream& stream) {
  if (!(t > 0)) fail(ErrorCode::domain, "t must be positive");
  if (alphas.empty()) fail(ErrorCode::invalid_argument, "no alphas given");
  double prev = 1;
  for (double a : alphas) {
    if (!(a > prev)) fail(ErrorCode::invalid_argument, "alphas must increase from above 1");
    prev = a;
  }
  CompositionChain ch;
  ch.t = t;
  ch.stream = stream;
  ch.alphas.push_back(1);
  ch.alphas.insert(ch.alphas.end(), alphas.begin(), alphas.end());

  if (src.kind == ProfileSource::polymer) {
    if (alphas.size() != 1)
      fail(ErrorCode::invalid_argument, "the polymer source builds one-step chains only");
    auto f = sample_profile(src, t, 1.0, stream.child(0));
    auto g = sample_profile(src, t, alphas[0] - 1, stream.child(1));
    ch.times = {t, alphas[0] * t};
    ch.outputs = {f.at(0.0), compose(f, g, t)};
    ch.direct = {f.at(0.0), std::numeric_limits<double>::quiet_NaN()};
    ch.profiles = {std::move(f), std::move(g)};
    return ch;
  }

  const double Tmax = alphas.back() * t;
  const SheGrid base = source_grid(src, t, src.coverage * std::sqrt(Tmax));
  const double dt = base.dt;
  std::vector<std::int64_t> steps{0};
  for (double a : ch.alphas) {
    auto k = static_cast<std::int64_t>(std::llround(a * t / dt));
    if (k <= steps.back()) fail(ErrorCode::invalid_argument, "alphas closer than one time step");
    steps.push_back(k);
  }
  for (std::size_t i = 1; i < steps.size(); ++i) ch.times.push_back(double(steps[i]) * dt);

  auto seg_grid = [&](std::size_t i) {
    SheGrid g = base;
    g.horizon = double(steps[i + 1] - steps[i]) * dt;
    g.dt = dt;
    return g.resolved();
  };
  // segment 0 from the delta gives h_t(1, .)
  SheSolver fwd(seg_grid(0), stream.child(0));
  fwd.advance(0, steps[1]);
  ch.profiles.push_back(field_profile(fwd.field(), src.dx, t, 1.0, ch.times[0]));
  ch.outputs.push_back(ch.profiles[0].at(0.0));
  ch.direct.push_back(ch.outputs[0]);
  std::vector<double> z = fwd.field();
  for (std::size_t i = 1; i < ch.alphas.size(); ++i) {
    double T0 = ch.times[i - 1], T1 = ch.times[i];
    double tau = T0;
    SheGrid g = seg_grid(i);
    std::int64_t n = steps[i + 1] - steps[i];
    RngStream seg = stream.child(i);
    SpatialProfile f = field_profile(z, src.dx, tau, 1.0, T0);
    SheSolver back(g, seg);
    back.advance(0, n, true);
    // I_t reads g at -y, and the column of the propagator into 0 is B(X)
    std::vector<double> b = back.field();
    std::reverse(b.begin(), b.end());
    SpatialProfile gp = field_profile(b, src.dx, tau, (T1 - T0) / tau, T1 - T0);
    double out = compose(f, gp, tau);
    // h_{t_{i-1}}(a, 0) = (t_{i-1} / t)^{-1/3} h_t(a t_{i-1} / t, 0)
    ch.outputs.push_back(std::cbrt(tau / t) * out);
    SheSolver step(g, seg);
    step.set_field(z);
    step.advance(0, n);
    z = step.field();
    ch.direct.push_back((std::log(z[z.size() / 2]) + T1 / 24) / std::cbrt(t));
    ch.profiles.push_back(std::move(gp));
  }
  return ch;
}

IncrementCheck g_compose_check(double t, double beta, std::size_t replicas,
                               const SourceConfig& src, const RngStream& stream,
                               unsigned threads) {
  if (!(beta > 0)) fail(ErrorCode::domain, "beta must be positive");
  if (replicas < 2) fail(ErrorCode::size, "need at least two replicas");
  IncrementCheck r;
  r.t = t;
  r.beta = beta;
  r.composed.resize(replicas);
  r.direct.resize(replicas);
  RngStream cs = stream.child(0), ds = stream.child(1);
  parallel_for(replicas, threads, [&](std::size_t i) {
    RngStream s = cs.child(i);
    auto f = sample_profile(src, t, 1.0, s.child(0));
    auto g = sample_profile(src, t, beta, s.child(1));
    r.composed[i] = compose(f, g, t) - f.at(0.0);
  });
  SheGrid g = source_grid(src, (1 + beta) * t, src.coverage * std::sqrt((1 + beta) * t));
  parallel_for(replicas, threads, [&](std::size_t i) {
    auto tr = sample_h_trajectory(t, {1.0, 1 + beta}, g, ds.child(i));
    r.direct[i] = tr.values[1] - tr.values[0];
  });
  r.ks = two_sample_ks(r.composed, r.direct);
  return r;
}

FkgCell fkg_cell(const std::vector<double>& a, const std::vector<double>& b,
                 double s1, double s2) {
  if (a.size() != b.size() || a.size() < 2)
    fail(ErrorCode::invalid_argument, "FKG needs paired samples");
  FkgCell c;
  c.s1 = s1;
  c.s2 = s2;
  double n = double(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    bool A = a[i] >= s1, B = b[i] >= s2;
    c.p1 += A;
    c.p2 += B;
    c.p_joint += A && B;
  }
  c.p1 /= n;
  c.p2 /= n;
  c.p_joint /= n;
  c.gap = c.p_joint - c.p1 * c.p2;
  double ss = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double A = a[i] >= s1, B = b[i] >= s2;
    double inf = (A * B - c.p_joint) - c.p2 * (A - c.p1) - c.p1 * (B - c.p2);
    ss += inf * inf;
  }
  c.se = std::sqrt(ss / (n - 1) / n);
  c.holds = c.gap >= -3 * c.se;
  return c;
}

std::vector<DecouplingRow> decoupling_report(double t1,
                                             const std::vector<double>& gap_ratios,
                                             const std::vector<double>& xs,
                                             std::size_t replicas,
                                             const SourceConfig& src,
                                             const RngStream& stream,
                                             unsigned threads) {
  std::vector<DecouplingRow> rows;
  for (std::size_t k = 0; k < gap_ratios.size(); ++k) {
    double beta = gap_ratios[k];
    if (!(beta > 0)) fail(ErrorCode::domain, "gap ratios must be positive");
    std::vector<double> delta(replicas);
    RngStream s = stream.child(k);
    parallel_for(replicas, threads, [&](std::size_t r) {
      RngStream rs = s.child(r);
      auto f = sample_profile(src, t1, 1.0, rs.child(0));
      auto g = sample_profile(src, t1, beta, rs.child(1));
      double scale = std::cbrt(1 / (1 + beta));
      // h_{t2} = (1+beta)^{-1/3} I_{t1}(f, g);  Y_2 = (1+beta)^{-1/3} g(0)
      delta[r] = scale * (compose(f, g, t1) - g.at(0.0));
    });
    DecouplingRow row;
    row.gap_ratio = beta;
    for (double x : xs) {
      double c = 0;
      for (double d : delta) c += std::abs(d) >= x;
      row.exceed.push_back(c / double(replicas));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace kpzlab
