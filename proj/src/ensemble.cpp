// SPDX-License-Identifier: Apache-2.0
#include "kpzlab/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "kpzlab/error.hpp"
#include "kpzlab/parallel.hpp"
#include "kpzlab/polymer.hpp"
#include "kpzlab/stats.hpp"

namespace kpzlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Draw used for the accept test of one attempt; far from the normal
// counters used by the bridges.
constexpr std::uint64_t kAcceptCounter = 0xacce97ULL << 32;

}  // namespace

double Hamiltonian::rate() const {
  switch (kind) {
    case HamiltonianKind::long_time: return std::cbrt(t);
    case HamiltonianKind::short_time:
      return std::pow(std::numbers::pi * t / 4, 0.25);
    case HamiltonianKind::custom: break;
  }
  fail(ErrorCode::invalid_argument, "custom Hamiltonian has no rate");
}

double Hamiltonian::operator()(double x) const {
  if (x == -kInf) return 0;
  if (x == kInf) return kInf;
  if (kind == HamiltonianKind::custom) return fn(x);
  return std::exp(rate() * x);
}

Hamiltonian make_hamiltonian(HamiltonianKind kind, double t) {
  require(kind != HamiltonianKind::custom,
          "use custom_hamiltonian for a custom H");
  require(t > 0 && std::isfinite(t), "Hamiltonian needs t > 0");
  Hamiltonian H;
  H.kind = kind;
  H.t = t;
  return H;
}

Hamiltonian custom_hamiltonian(std::function<double(double)> fn) {
  require(static_cast<bool>(fn), "custom Hamiltonian needs a function");
  Hamiltonian H;
  H.kind = HamiltonianKind::custom;
  H.fn = std::move(fn);
  return H;
}

bool hamiltonian_is_admissible(const Hamiltonian& H,
                               const std::vector<double>& xs) {
  std::vector<double> v(xs);
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  std::vector<double> h(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    h[i] = H(v[i]);
    if (!(h[i] > 0)) return false;
    if (i > 0 && !(h[i] >= h[i - 1])) return false;
  }
  // slopes of consecutive chords must not decrease
  for (std::size_t i = 2; i < v.size(); ++i) {
    double s0 = (h[i - 1] - h[i - 2]) / (v[i - 1] - v[i - 2]);
    double s1 = (h[i] - h[i - 1]) / (v[i] - v[i - 1]);
    if (s1 < s0 * (1 - 1e-12) - 1e-300) return false;
  }
  return true;
}

double EnsembleSegment::upper_at(int j) const {
  return upper.empty() ? kInf : upper[static_cast<std::size_t>(j)];
}

double EnsembleSegment::lower_at(int j) const {
  return lower.empty() ? -kInf : lower[static_cast<std::size_t>(j)];
}

void EnsembleSegment::validate(bool need_paths) const {
  require(std::isfinite(a) && std::isfinite(b) && a < b,
          "segment needs a finite interval a < b");
  require(M >= 1, "segment needs M >= 1");
  require(k1 >= 1, "curve indices start at 1");
  require(!entrance.empty(), "segment needs at least one curve");
  require(entrance.size() == exit.size(),
          "entrance and exit vectors differ in length");
  for (std::size_t i = 0; i < entrance.size(); ++i)
    require(std::isfinite(entrance[i]) && std::isfinite(exit[i]),
            "entrance and exit data must be finite");
  const std::size_t n = static_cast<std::size_t>(M) + 1;
  require(upper.empty() || upper.size() == n,
          "upper boundary does not match the grid");
  require(lower.empty() || lower.size() == n,
          "lower boundary does not match the grid");
  for (double v : upper)
    require(!std::isnan(v) && v != -kInf,
            "upper boundary must be finite or +inf");
  for (double v : lower)
    require(!std::isnan(v) && v != kInf,
            "lower boundary must be finite or -inf");
  if (!need_paths && paths.empty()) return;
  require(paths.size() == entrance.size(), "paths do not match the curves");
  for (std::size_t i = 0; i < paths.size(); ++i) {
    require(paths[i].size() == n, "path does not match the grid");
    require(paths[i].front() == entrance[i] && paths[i].back() == exit[i],
            "path does not match its endpoints");
    for (double v : paths[i]) require(std::isfinite(v), "path is not finite");
  }
}

double log_gibbs_weight(const EnsembleSegment& seg, const Hamiltonian& H) {
  seg.validate(true);
  const int k = seg.curves();
  const double h = seg.spacing();
  double total = 0;
  // pair i couples L_{i-1} (above) with L_i (below); i = 0 is (f, L_0)
  // and i = k is (L_{k-1}, g)
  for (int i = 0; i <= k; ++i) {
    double s = 0;
    for (int j = 0; j <= seg.M; ++j) {
      double above = i == 0 ? seg.upper_at(j) : seg.paths[i - 1][j];
      double below = i == k ? seg.lower_at(j) : seg.paths[i][j];
      double v = H(below - above);
      if (j == 0 || j == seg.M) v *= 0.5;
      s += v;
    }
    if (std::isinf(s)) return -kInf;
    total += s * h;
  }
  return -total;
}

double gibbs_weight(const EnsembleSegment& seg, const Hamiltonian& H) {
  return std::exp(log_gibbs_weight(seg, H));
}

ResampleResult resample_segment(const EnsembleSegment& spec,
                                const Hamiltonian& H, const RngStream& stream,
                                std::size_t max_attempts) {
  spec.validate();
  require(max_attempts >= 1, "need at least one attempt");
  ResampleResult out;
  out.segment = spec;
  auto& seg = out.segment;
  const int k = seg.curves();
  const std::size_t n = static_cast<std::size_t>(seg.M) + 1;
  seg.paths.assign(static_cast<std::size_t>(k), std::vector<double>(n));
  double wsum = 0;
  for (std::size_t r = 0; r < max_attempts; ++r) {
    RngStream s = stream.child(r);
    for (int i = 0; i < k; ++i)
      fill_bridge(seg.a, seg.b, seg.entrance[i], seg.exit[i], seg.M, s,
                  static_cast<std::uint64_t>(i) * n, seg.paths[i].data());
    double lw = log_gibbs_weight(seg, H);
    wsum += std::exp(lw);
    if (std::log(s.uniform(kAcceptCounter)) < lw) {
      out.attempts = r + 1;
      out.mean_weight = wsum / double(r + 1);
      return out;
    }
  }
  fail(ErrorCode::convergence,
       "rejection sampler gave up after " + std::to_string(max_attempts) +
           " attempts; mean weight " +
           std::to_string(wsum / double(max_attempts)));
}

namespace {

// Full conditional of one interior node under the grid measure:
// log p(x) = -(x - mu)^2 / (2 s2) - h (H(x - u) + H(l - x)).
struct Conditional {
  double mu, s2, u, l, h, r;

  double penalty(double x) const {
    double p = 0;
    if (u != kInf) p += std::exp(r * (x - u));
    if (l != -kInf) p += std::exp(r * (l - x));
    return h * p;
  }
  double logp(double x) const {
    double d = x - mu;
    return -d * d / (2 * s2) - penalty(x);
  }
  double dlogp(double x) const {
    double v = -(x - mu) / s2;
    if (u != kInf) v -= h * r * std::exp(r * (x - u));
    if (l != -kInf) v += h * r * std::exp(r * (l - x));
    return v;
  }
  double curvature(double x) const {
    return 1 / s2 + r * penalty(x);
  }
  bool operator==(const Conditional& o) const {
    return mu == o.mu && u == o.u && l == o.l;
  }

  double mode() const {
    // dlogp is strictly decreasing; bracket then safeguarded Newton
    double step = std::sqrt(s2);
    double lo = mu, hi = mu;
    if (dlogp(mu) > 0) {
      hi = mu + step;
      while (dlogp(hi) > 0) { lo = hi; step *= 2; hi += step; }
    } else {
      lo = mu - step;
      while (dlogp(lo) < 0) { hi = lo; step *= 2; lo -= step; }
    }
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 200 && hi - lo > 1e-13 * (1 + std::abs(x)); ++it) {
      double d = dlogp(x);
      if (d > 0) lo = x; else hi = x;
      double nx = x + d / curvature(x);
      if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
      if (nx == x) break;
      x = nx;
    }
    return x;
  }

  // Range holding all but ~e^{-36} of the mass; sigma is the local scale.
  void support(double& lo, double& hi, double& sigma) const {
    double m = mode();
    double top = logp(m);
    sigma = 1 / std::sqrt(curvature(m));
    double step = sigma;
    lo = m - step;
    while (top - logp(lo) < 36) { step *= 1.5; lo -= step; }
    step = sigma;
    hi = m + step;
    while (top - logp(hi) < 36) { step *= 1.5; hi += step; }
  }
};

// Piecewise-linear CDFs on one shared grid. Node masses of ordered
// conditionals keep the likelihood-ratio order, so the interpolated
// inverses are ordered as well.
class SharedInverse {
 public:
  void build(const Conditional* c, int count) {
    double lo = kInf, hi = -kInf, sig = kInf;
    for (int q = 0; q < count; ++q) {
      double a, b, s;
      c[q].support(a, b, s);
      lo = std::min(lo, a);
      hi = std::max(hi, b);
      sig = std::min(sig, s);
    }
    int n = static_cast<int>(std::ceil((hi - lo) / (sig / 8)));
    n = std::clamp(n, 64, 16384);
    lo_ = lo;
    dx_ = (hi - lo) / n;
    n_ = n;
    for (int q = 0; q < count; ++q) {
      auto& cdf = cdf_[q];
      lp_.resize(static_cast<std::size_t>(n) + 1);
      double top = -kInf;
      for (int i = 0; i <= n; ++i) {
        lp_[i] = c[q].logp(lo + dx_ * i);
        top = std::max(top, lp_[i]);
      }
      cdf.resize(static_cast<std::size_t>(n) + 1);
      cdf[0] = 0;
      double prev = std::exp(lp_[0] - top);
      for (int i = 1; i <= n; ++i) {
        double cur = std::exp(lp_[i] - top);
        cdf[i] = cdf[i - 1] + 0.5 * (prev + cur);
        prev = cur;
      }
    }
  }

  double invert(int q, double U) const {
    const auto& cdf = cdf_[q];
    double target = U * cdf.back();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
    int i = static_cast<int>(it - cdf.begin()) - 1;
    i = std::clamp(i, 0, n_ - 1);
    double mass = cdf[i + 1] - cdf[i];
    double frac = mass > 0 ? (target - cdf[i]) / mass : 0.5;
    frac = std::clamp(frac, 0.0, 1.0);
    return lo_ + dx_ * (i + frac);
  }

 private:
  double lo_ = 0, dx_ = 0;
  int n_ = 0;
  std::vector<double> cdf_[2];
  std::vector<double> lp_;
};

void check_order(const std::vector<double>& hi, const std::vector<double>& lo,
                 const char* what) {
  for (std::size_t j = 0; j < hi.size(); ++j) {
    if (lo[j] == hi[j]) continue;
    require(lo[j] < hi[j] || (std::isinf(lo[j]) && lo[j] == hi[j]),
            std::string("pair needs spec2 <= spec1 in ") + what);
  }
}

double split_rhat(const std::vector<double>& trace) {
  // two halves of the second half of the trace
  std::size_t n = trace.size() / 4;
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  const double* part[2] = {trace.data() + trace.size() - 2 * n,
                           trace.data() + trace.size() - n};
  double mean[2], var[2];
  for (int c = 0; c < 2; ++c) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += part[c][i];
    mean[c] = s / n;
    double v = 0;
    for (std::size_t i = 0; i < n; ++i)
      v += (part[c][i] - mean[c]) * (part[c][i] - mean[c]);
    var[c] = v / (n - 1);
  }
  double W = 0.5 * (var[0] + var[1]);
  double grand = 0.5 * (mean[0] + mean[1]);
  double B = n * ((mean[0] - grand) * (mean[0] - grand) +
                  (mean[1] - grand) * (mean[1] - grand));
  if (W <= 0) return 1;
  double vhat = (n - 1.0) / n * W + B / n;
  return std::sqrt(vhat / W);
}

}  // namespace

MonotonePair monotone_resample_pair(const EnsembleSegment& spec1,
                                    const EnsembleSegment& spec2,
                                    const Hamiltonian& H,
                                    const RngStream& stream, int sweeps) {
  spec1.validate();
  spec2.validate();
  require(H.kind != HamiltonianKind::custom,
          "the monotone coupling needs H^long or H^short");
  require(sweeps >= 1, "need at least one sweep");
  require(spec1.a == spec2.a && spec1.b == spec2.b && spec1.M == spec2.M &&
              spec1.curves() == spec2.curves() && spec1.k1 == spec2.k1,
          "paired segments must share curves and grid");
  require(spec1.M >= 2, "pair resampling needs an interior grid point");
  const int k = spec1.curves();
  const int M = spec1.M;
  const std::size_t n = static_cast<std::size_t>(M) + 1;
  {
    std::vector<double> u1(n), u2(n), l1(n), l2(n);
    for (int j = 0; j <= M; ++j) {
      u1[j] = spec1.upper_at(j);
      u2[j] = spec2.upper_at(j);
      l1[j] = spec1.lower_at(j);
      l2[j] = spec2.lower_at(j);
    }
    check_order(u1, u2, "the upper boundary");
    check_order(l1, l2, "the lower boundary");
    check_order(spec1.entrance, spec2.entrance, "the entrance data");
    check_order(spec1.exit, spec2.exit, "the exit data");
  }

  MonotonePair out;
  out.upper = spec1;
  out.lower = spec2;
  out.sweeps = sweeps;
  EnsembleSegment* seg[2] = {&out.upper, &out.lower};
  for (auto* s : seg) {
    s->paths.assign(static_cast<std::size_t>(k), std::vector<double>(n));
    for (int i = 0; i < k; ++i)
      for (int j = 0; j <= M; ++j)
        s->paths[i][j] =
            s->entrance[i] + (s->exit[i] - s->entrance[i]) * j / double(M);
  }

  const double h = spec1.spacing();
  const double r = H.rate();
  SharedInverse inv;
  std::vector<double> trace[2];
  trace[0].reserve(static_cast<std::size_t>(sweeps));
  trace[1].reserve(static_cast<std::size_t>(sweeps));
  const int mid = M / 2;

  for (int sw = 0; sw < sweeps; ++sw) {
    for (int i = 0; i < k; ++i) {
      for (int j = 1; j < M; ++j) {
        Conditional c[2];
        for (int q = 0; q < 2; ++q) {
          const auto& L = seg[q]->paths;
          c[q].mu = 0.5 * (L[i][j - 1] + L[i][j + 1]);
          c[q].s2 = 0.5 * h;
          c[q].u = i == 0 ? seg[q]->upper_at(j) : L[i - 1][j];
          c[q].l = i == k - 1 ? seg[q]->lower_at(j) : L[i + 1][j];
          c[q].h = h;
          c[q].r = r;
        }
        std::uint64_t counter =
            (static_cast<std::uint64_t>(sw) * k + i) * n + j;
        double U = stream.uniform(counter);
        double x1, x2;
        if (c[0] == c[1]) {
          inv.build(c, 1);
          x1 = x2 = inv.invert(0, U);
        } else {
          inv.build(c, 2);
          x1 = inv.invert(0, U);
          x2 = inv.invert(1, U);
          if (x1 < x2) {
            if (x2 - x1 > 1e-9 * (1 + std::abs(x2)))
              fail(ErrorCode::internal,
                   "monotone coupling broke the ordering");
            x1 = x2;
            ++out.guarded;
          }
        }
        seg[0]->paths[i][j] = x1;
        seg[1]->paths[i][j] = x2;
      }
    }
    trace[0].push_back(seg[0]->paths[0][mid]);
    trace[1].push_back(seg[1]->paths[0][mid]);
  }

  for (int i = 0; i < k; ++i)
    for (int j = 0; j <= M; ++j)
      if (out.upper.paths[i][j] < out.lower.paths[i][j])
        fail(ErrorCode::internal, "monotone coupling broke the ordering");
  double r0 = split_rhat(trace[0]), r1 = split_rhat(trace[1]);
  out.rhat = std::max(r0, r1);
  return out;
}

namespace {

EnsembleSegment single(double x, double y, int M, double a, double b) {
  EnsembleSegment s;
  s.a = a;
  s.b = b;
  s.M = M;
  s.entrance = {x};
  s.exit = {y};
  return s;
}

}  // namespace

EnsembleCheck free_bridge_check(std::size_t replicas, const RngStream& stream,
                                unsigned threads) {
  auto H = make_hamiltonian(HamiltonianKind::long_time, 1);
  auto spec = single(0.4, -0.6, 16, 0, 2);
  std::vector<double> mids(replicas);
  parallel_for(replicas, threads, [&](std::size_t r) {
    mids[r] = resample_segment(spec, H, stream.child(r)).segment.paths[0][8];
  });
  EnsembleCheck c;
  c.name = "free-bridge";
  c.replicas = replicas;
  auto ks = ks_normal(mids, -0.1, std::sqrt(0.5));
  c.statistic = ks.statistic;
  c.p_value = ks.p_value;
  c.pass = ks.p_value > 0.01;
  return c;
}

EnsembleCheck monotone_order_check(HamiltonianKind kind, double t,
                                   std::size_t replicas, int sweeps,
                                   const RngStream& stream, unsigned threads) {
  auto H = make_hamiltonian(kind, t);
  EnsembleSegment hi, lo;
  hi.M = lo.M = 16;
  hi.entrance = {0.5, -0.5};
  hi.exit = {0.3, -0.2};
  lo.entrance = {0.2, -0.9};
  lo.exit = {0.3, -0.6};
  hi.upper.assign(17, 1.5);
  lo.upper.assign(17, 1.0);
  hi.lower.assign(17, -1.0);
  lo.lower.assign(17, -1.5);
  std::vector<unsigned char> bad(replicas, 0);
  parallel_for(replicas, threads, [&](std::size_t r) {
    try {
      auto p = monotone_resample_pair(hi, lo, H, stream.child(r), sweeps);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j <= 16; ++j)
          if (p.upper.paths[i][j] < p.lower.paths[i][j]) bad[r] = 1;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::internal) throw;
      bad[r] = 1;
    }
  });
  EnsembleCheck c;
  c.name = kind == HamiltonianKind::long_time ? "monotone-long" : "monotone-short";
  c.replicas = replicas;
  for (auto b : bad) c.failures += b;
  c.statistic = double(c.failures) / double(std::max<std::size_t>(replicas, 1));
  c.p_value = c.failures == 0 ? 1 : 0;
  c.pass = c.failures == 0;
  return c;
}

EnsembleCheck gibbs_fixed_point_check(double t, int n, std::size_t profiles,
                                      const RngStream& stream,
                                      unsigned threads) {
  auto H = make_hamiltonian(HamiltonianKind::short_time, 2 * t);
  const int w = 2;
  const int per = 12;
  const double unit = 4.0 / std::sqrt(std::numbers::pi * n);  // cell width
  const double half = (per / 2 * 2 * w + 2) * unit;
  std::vector<std::vector<double>> orig(profiles), res(profiles);
  parallel_for(profiles, threads, [&](std::size_t r) {
    auto prof = spatial_profile_g(t, n, half, stream.child(0).child(r));
    const std::size_t c0 = prof.size() / 2;
    for (int win = -per / 2; win < per / 2; ++win) {
      std::size_t lo = c0 + win * 2 * w, hi = lo + 2 * w, mid = lo + w;
      double chord = 0.5 * (prof.values[lo] + prof.values[hi]);
      orig[r].push_back(prof.values[mid] - chord);
      auto spec = single(prof.values[lo], prof.values[hi], 2 * w, prof.x[lo],
                         prof.x[hi]);
      auto out = resample_segment(
          spec, H, stream.child(1).child(r).child(std::uint64_t(win + per / 2)));
      res[r].push_back(out.segment.paths[0][w] - chord);
    }
  });
  std::vector<double> a, b;
  for (std::size_t r = 0; r < profiles; ++r) {
    a.insert(a.end(), orig[r].begin(), orig[r].end());
    b.insert(b.end(), res[r].begin(), res[r].end());
  }
  auto ks = two_sample_ks(a, b);
  EnsembleCheck c;
  c.name = "gibbs-fixed-point";
  c.replicas = a.size();
  c.statistic = ks.statistic;
  c.p_value = ks.p_value;
  c.pass = ks.p_value > 0.01;
  return c;
}

}  // namespace kpzlab
