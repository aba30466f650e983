// SPDX-License-Identifier: Apache-2.0
#include "kpzlab/stats.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "kpzlab/error.hpp"

namespace kpzlab {

namespace {

void require_nonempty(const std::vector<double>& v, const char* what) {
  if (v.empty())
    fail(ErrorCode::invalid_argument, std::string(what) + " is empty");
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t m = v.size();
  return m % 2 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double kolmogorov_survival(double lambda) {
  if (lambda <= 0) return 1.0;
  if (lambda < 0.2) return 1.0;
  double sum = 0, sign = 1;
  for (int j = 1; j <= 100; ++j) {
    double term = sign * std::exp(-2.0 * j * j * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-16 * std::abs(sum)) break;
    sign = -sign;
  }
  return std::clamp(2 * sum, 0.0, 1.0);
}

namespace {
double ks_p(double d, double ne) {
  double s = std::sqrt(ne);
  return kolmogorov_survival((s + 0.12 + 0.11 / s) * d);
}
}  // namespace

KsResult ks_one_sample(std::vector<double> samples,
                       const std::function<double(double)>& cdf) {
  require_nonempty(samples, "KS sample");
  std::sort(samples.begin(), samples.end());
  const double n = double(samples.size());
  double d = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double f = cdf(samples[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return {d, ks_p(d, n), samples.size(), 0};
}

KsResult ks_normal(std::vector<double> samples, double mean, double sd) {
  return ks_one_sample(std::move(samples), [mean, sd](double x) {
    return normal_cdf((x - mean) / sd);
  });
}

KsResult two_sample_ks(std::vector<double> a, std::vector<double> b) {
  require_nonempty(a, "first KS sample");
  require_nonempty(b, "second KS sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = double(a.size()), nb = double(b.size());
  std::size_t i = 0, j = 0;
  double d = 0;
  while (i < a.size() && j < b.size()) {
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  return {d, ks_p(d, na * nb / (na + nb)), a.size(), b.size()};
}

double homogeneity_p_value(const std::vector<std::vector<double>>& groups,
                           int bins) {
  require(groups.size() >= 2, "homogeneity test needs at least two groups");
  require(bins >= 2, "homogeneity test needs at least two bins");
  std::vector<double> pooled;
  for (const auto& g : groups) {
    require_nonempty(g, "homogeneity group");
    pooled.insert(pooled.end(), g.begin(), g.end());
  }
  std::sort(pooled.begin(), pooled.end());
  std::vector<double> cuts;
  for (int b = 1; b < bins; ++b)
    cuts.push_back(pooled[pooled.size() * b / bins]);
  const std::size_t G = groups.size();
  std::vector<std::vector<double>> table(G, std::vector<double>(bins, 0.0));
  for (std::size_t g = 0; g < G; ++g)
    for (double v : groups[g]) {
      auto pos = std::upper_bound(cuts.begin(), cuts.end(), v) - cuts.begin();
      table[g][static_cast<std::size_t>(pos)] += 1;
    }
  std::vector<double> row(G, 0), col(bins, 0);
  double total = 0;
  for (std::size_t g = 0; g < G; ++g)
    for (int b = 0; b < bins; ++b) {
      row[g] += table[g][b];
      col[b] += table[g][b];
      total += table[g][b];
    }
  double chi2 = 0;
  int used_bins = 0;
  for (int b = 0; b < bins; ++b) {
    if (col[b] == 0) continue;
    ++used_bins;
    for (std::size_t g = 0; g < G; ++g) {
      double e = row[g] * col[b] / total;
      chi2 += (table[g][b] - e) * (table[g][b] - e) / e;
    }
  }
  int dof = (int(G) - 1) * (used_bins - 1);
  if (dof <= 0) return 1.0;
  boost::math::chi_squared dist(dof);
  return boost::math::cdf(boost::math::complement(dist, chi2));
}

PaleyZygmundReport paley_zygmund(const std::vector<double>& samples,
                                 double delta) {
  require_nonempty(samples, "Paley-Zygmund sample");
  require(delta > 0 && delta < 1, "Paley-Zygmund delta must lie in (0,1)");
  const double n = double(samples.size());
  double m1 = 0, m2 = 0;
  for (double x : samples) {
    require(x >= 0 && std::isfinite(x),
            "Paley-Zygmund needs nonnegative finite samples");
    m1 += x;
    m2 += x * x;
  }
  m1 /= n;
  m2 /= n;
  require(m2 > 0, "Paley-Zygmund sample is identically zero");
  PaleyZygmundReport r;
  r.delta = delta;
  r.mean = m1;
  r.second_moment = m2;
  double thr = delta * m1;
  std::size_t hits = 0;
  for (double x : samples) hits += x >= thr;
  r.p_hat = hits / n;
  r.lower_bound = (1 - delta) * (1 - delta) * m1 * m1 / m2;
  // Delta-method SE of p_hat - bound via per-sample influence terms.
  double k = (1 - delta) * (1 - delta);
  double dm1 = 2 * k * m1 / m2, dm2 = -k * m1 * m1 / (m2 * m2);
  double s1 = 0, s2 = 0;
  for (double x : samples) {
    double infl = ((x >= thr ? 1.0 : 0.0) - r.p_hat) -
                  (dm1 * (x - m1) + dm2 * (x * x - m2));
    s1 += infl;
    s2 += infl * infl;
  }
  double var = s2 / n - (s1 / n) * (s1 / n);
  r.se = std::sqrt(std::max(var, 0.0) / n);
  r.holds = r.p_hat >= r.lower_bound - 3 * r.se;
  return r;
}

const char* tail_side_name(TailSide s) {
  return s == TailSide::upper ? "upper" : "lower";
}

double TailFit::fitted_log_survival(double s) const {
  return a_hat - b_hat * std::log(s) - c_hat * std::pow(s, p_hat);
}

namespace {

struct TailModel {
  // theta = (a, b, log c, log p)
  static double log_surv(const Eigen::Vector4d& th, double s) {
    return th[0] - th[1] * std::log(s) - std::exp(th[2]) * std::pow(s, std::exp(th[3]));
  }
};

// Poisson means of the cells: below e_0, the bins [e_j, e_{j+1}), and the
// open cell [e_K, inf). Returns false if the model is not a valid survival
// function on the window.
bool cell_means(const Eigen::Vector4d& th, const std::vector<double>& edges,
                double N, std::vector<double>& mu) {
  const std::size_t K = edges.size() - 1;
  mu.assign(K + 2, 0.0);
  std::vector<double> P(edges.size());
  for (std::size_t j = 0; j < edges.size(); ++j) {
    double lp = TailModel::log_surv(th, edges[j]);
    if (!std::isfinite(lp) || lp > 0) return false;
    P[j] = std::exp(lp);
  }
  mu[0] = N * (1 - P[0]);
  for (std::size_t j = 0; j < K; ++j) {
    double d = P[j] - P[j + 1];
    if (!(d > 0)) return false;
    mu[j + 1] = N * d;
  }
  mu[K + 1] = N * P[K];
  return mu[0] > 0 && mu[K + 1] > 0;
}

double poisson_deviance(const std::vector<double>& n,
                        const std::vector<double>& mu) {
  double d = 0;
  for (std::size_t j = 0; j < n.size(); ++j) {
    double t = n[j] > 0 ? n[j] * std::log(n[j] / mu[j]) : 0.0;
    d += 2 * (t - (n[j] - mu[j]));
  }
  return d;
}

}  // namespace

TailFit fit_tail(const std::vector<double>& samples, TailSide side,
                 double s_lo, double s_hi, const TailFitOptions& opt) {
  if (samples.size() < opt.min_samples)
    fail(ErrorCode::size, "tail fit needs at least " +
                              std::to_string(opt.min_samples) +
                              " samples, got " + std::to_string(samples.size()));
  require(s_lo > 0 && s_hi > s_lo, "tail window must satisfy 0 < s_lo < s_hi");
  require(opt.bins >= 4, "tail fit needs at least 4 bins");
  std::vector<double> v(samples);
  if (side == TailSide::lower)
    for (double& x : v) x = -x;
  std::sort(v.begin(), v.end());
  const std::size_t N = v.size();
  const double Nd = double(N);
  auto count_ge = [&](double s) {
    return static_cast<std::size_t>(v.end() - std::lower_bound(v.begin(), v.end(), s));
  };
  TailFit fit;
  fit.side = side;
  fit.sample_size = N;
  fit.s_lo = s_lo;
  fit.s_hi = s_hi;
  if (N <= opt.exclude_top + opt.min_exceedances)
    fail(ErrorCode::size, "too few samples for the tail fit");
  double top = v[N - 1 - opt.exclude_top];
  double by_count = v[N - opt.min_exceedances];
  double hi = std::min({s_hi, top, by_count});
  if (!(hi > s_lo) || count_ge(s_lo) < opt.min_exceedances) {
    fail(ErrorCode::size,
         "insufficient exceedances: only " + std::to_string(count_ge(s_lo)) +
             " samples beyond s_lo = " + std::to_string(s_lo) +
             "; usable window ends at " + std::to_string(hi));
  }
  fit.s_used_hi = hi;
  const int K = opt.bins;
  std::vector<double> edges(K + 1);
  for (int j = 0; j <= K; ++j) edges[j] = s_lo + (hi - s_lo) * j / K;
  std::vector<double> cells(K + 2, 0.0);
  for (int j = 0; j <= K; ++j) {
    std::size_t c = count_ge(edges[j]);
    fit.thresholds.push_back(edges[j]);
    fit.exceedances.push_back(c);
    fit.log_survival.push_back(std::log(c / Nd));
  }
  cells[0] = Nd - double(fit.exceedances[0]);
  for (int j = 0; j < K; ++j)
    cells[j + 1] = double(fit.exceedances[j]) - double(fit.exceedances[j + 1]);
  cells[K + 1] = double(fit.exceedances[K]);

  // Log-log regression (reported alongside).
  {
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int j = 0; j <= K; ++j) {
      double P = fit.exceedances[j] / Nd;
      double lp = std::log(P);
      if (!(lp < 0)) continue;
      double var = (1 - P) / (Nd * P) / (lp * lp);
      double w = 1 / var;
      double x = std::log(edges[j]), y = std::log(-lp);
      sw += w; sx += w * x; sy += w * y; sxx += w * x * x; sxy += w * x * y;
    }
    double det = sw * sxx - sx * sx;
    if (det > 0) {
      fit.loglog_p = (sw * sxy - sx * sy) / det;
      fit.loglog_c = std::exp((sy - fit.loglog_p * sx) / sw);
    }
  }

  // Start: scan p, solve the linear WLS for (a, b, c) on log P at the edges.
  Eigen::Vector4d th;
  {
    double best = std::numeric_limits<double>::infinity();
    for (double p = 0.3; p <= 6.0001; p += 0.05) {
      Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
      Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
      for (int j = 0; j <= K; ++j) {
        double P = fit.exceedances[j] / Nd;
        double w = Nd * P / (1 - P + 1e-300);
        Eigen::Vector3d f(1.0, -std::log(edges[j]), -std::pow(edges[j], p));
        A += w * f * f.transpose();
        rhs += w * f * std::log(P);
      }
      Eigen::Vector3d sol = A.ldlt().solve(rhs);
      if (!(sol[2] > 0)) continue;
      double sse = 0;
      for (int j = 0; j <= K; ++j) {
        double P = fit.exceedances[j] / Nd;
        double w = Nd * P / (1 - P + 1e-300);
        double r = std::log(P) - (sol[0] - sol[1] * std::log(edges[j]) -
                                  sol[2] * std::pow(edges[j], p));
        sse += w * r * r;
      }
      if (sse < best) {
        best = sse;
        th = Eigen::Vector4d(sol[0], sol[1], std::log(sol[2]), std::log(p));
      }
    }
    if (!std::isfinite(best))
      fail(ErrorCode::convergence, "tail fit found no admissible start");
  }

  // Fisher scoring with Levenberg damping on the binned Poisson likelihood.
  std::vector<double> mu;
  if (!cell_means(th, edges, Nd, mu))
    fail(ErrorCode::convergence, "tail fit start is not a valid survival model");
  double dev = poisson_deviance(cells, mu);
  double lambda = 1e-3;
  auto jacobian = [&](const Eigen::Vector4d& t0, const std::vector<double>& m0,
                      Eigen::MatrixXd& J) {
    J.resize(static_cast<Eigen::Index>(m0.size()), 4);
    for (int q = 0; q < 4; ++q) {
      double h = 1e-6 * std::max(1.0, std::abs(t0[q]));
      Eigen::Vector4d tp = t0, tm = t0;
      tp[q] += h;
      tm[q] -= h;
      std::vector<double> mp, mm;
      bool okp = cell_means(tp, edges, Nd, mp);
      bool okm = cell_means(tm, edges, Nd, mm);
      for (std::size_t j = 0; j < m0.size(); ++j) {
        double d;
        if (okp && okm) d = (mp[j] - mm[j]) / (2 * h);
        else if (okp) d = (mp[j] - m0[j]) / h;
        else if (okm) d = (m0[j] - mm[j]) / h;
        else d = 0;
        J(static_cast<Eigen::Index>(j), q) = d;
      }
    }
  };
  Eigen::MatrixXd J;
  Eigen::Matrix4d info;
  int it = 0;
  for (; it < 200; ++it) {
    jacobian(th, mu, J);
    Eigen::Vector4d grad = Eigen::Vector4d::Zero();
    info.setZero();
    for (Eigen::Index j = 0; j < J.rows(); ++j) {
      double m = mu[static_cast<std::size_t>(j)];
      Eigen::Vector4d g = J.row(j).transpose();
      grad += g * (cells[static_cast<std::size_t>(j)] - m) / m;
      info += g * g.transpose() / m;
    }
    bool improved = false;
    for (int tries = 0; tries < 30; ++tries) {
      Eigen::Matrix4d A = info;
      for (int q = 0; q < 4; ++q) A(q, q) *= 1 + lambda;
      Eigen::Vector4d step = A.ldlt().solve(grad);
      Eigen::Vector4d cand = th + step;
      std::vector<double> mc;
      if (cell_means(cand, edges, Nd, mc)) {
        double dc = poisson_deviance(cells, mc);
        if (dc <= dev) {
          bool done = dev - dc < 1e-10 * (1 + dev);
          th = cand;
          mu = mc;
          dev = dc;
          lambda = std::max(lambda / 10, 1e-12);
          improved = true;
          if (done) it = 1000;
          break;
        }
      }
      lambda *= 10;
    }
    if (!improved) break;
  }
  jacobian(th, mu, J);
  info.setZero();
  for (Eigen::Index j = 0; j < J.rows(); ++j) {
    Eigen::Vector4d g = J.row(j).transpose();
    info += g * g.transpose() / mu[static_cast<std::size_t>(j)];
  }
  Eigen::Matrix4d cov = info.inverse();
  fit.iterations = std::min(it, 200);
  fit.deviance = dev;
  fit.a_hat = th[0];
  fit.b_hat = th[1];
  fit.c_hat = std::exp(th[2]);
  fit.p_hat = std::exp(th[3]);
  fit.c_ci = 1.96 * fit.c_hat * std::sqrt(std::max(cov(2, 2), 0.0));
  fit.p_ci = 1.96 * fit.p_hat * std::sqrt(std::max(cov(3, 3), 0.0));
  if (!std::isfinite(fit.p_hat) || !(fit.p_hat > 0))
    fail(ErrorCode::convergence, "tail fit did not converge");
  return fit;
}

double lil_upper_constant() {
  return std::pow(3.0 / (4.0 * std::numbers::sqrt2), 2.0 / 3.0);
}
double lil_lower_constant() { return -std::cbrt(6.0); }
double upper_tail_constant() { return 4.0 * std::numbers::sqrt2 / 3.0; }
double lower_tail_constant() { return 1.0 / 6.0; }

LilTrack track_lil(const std::vector<double>& times,
                   const std::vector<double>& values) {
  require(times.size() == values.size(), "times and values differ in size");
  require(!times.empty(), "empty trajectory");
  LilTrack tr;
  tr.upper_reference = lil_upper_constant();
  tr.lower_reference = lil_lower_constant();
  const double ee = std::exp(std::numbers::e);
  double mx = -std::numeric_limits<double>::infinity();
  double mn = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < times.size(); ++i) {
    double t = times[i];
    if (!(t >= ee * (1 - 1e-12)))
      fail(ErrorCode::domain, "LIL gauge needs t >= e^e, got " + std::to_string(t));
    if (i > 0 && !(t > times[i - 1]))
      fail(ErrorCode::invalid_argument, "trajectory times must increase");
    double ll = std::max(std::log(std::log(t)), 1.0);
    mx = std::max(mx, values[i] / std::pow(ll, 2.0 / 3.0));
    mn = std::min(mn, values[i] / std::cbrt(ll));
    tr.times.push_back(t);
    tr.running_max.push_back(mx);
    tr.running_min.push_back(mn);
  }
  return tr;
}

HolderFit fit_holder(const std::vector<std::vector<double>>& paths,
                     double spacing, const std::vector<int>& lags,
                     int groups) {
  if (paths.size() < 1000)
    fail(ErrorCode::size, "Holder fit needs at least 1000 replicas");
  if (lags.size() < 100)
    fail(ErrorCode::size, "Holder fit needs at least 100 lags");
  require(spacing > 0, "Holder fit spacing must be positive");
  require(groups >= 1 && std::size_t(groups) <= paths.size(),
          "bad group count");
  std::vector<int> sorted(lags);
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() <= 0 || std::unique(sorted.begin(), sorted.end()) != sorted.end())
    fail(ErrorCode::invalid_argument, "lag grid must be positive and distinct");
  const std::size_t len = paths.front().size();
  for (const auto& p : paths)
    require(p.size() == len, "Holder paths must share one length");
  if (std::size_t(sorted.back()) >= len)
    fail(ErrorCode::invalid_argument, "lag exceeds the path length");

  HolderFit out;
  const std::size_t R = paths.size();
  for (int m : sorted) {
    const std::size_t cnt = len - std::size_t(m);
    double mean = 0;
    for (const auto& p : paths)
      for (std::size_t j = 0; j < cnt; ++j) mean += p[j + m] - p[j];
    mean /= double(R * cnt);
    std::vector<double> gmeans(static_cast<std::size_t>(groups), 0.0);
    std::vector<double> gcount(static_cast<std::size_t>(groups), 0.0);
    for (std::size_t r = 0; r < R; ++r) {
      std::size_t g = r * std::size_t(groups) / R;
      double acc = 0;
      for (std::size_t j = 0; j < cnt; ++j)
        acc += std::abs(paths[r][j + m] - paths[r][j] - mean);
      gmeans[g] += acc / double(cnt);
      gcount[g] += 1;
    }
    for (std::size_t g = 0; g < gmeans.size(); ++g) gmeans[g] /= gcount[g];
    out.lags.push_back(m * spacing);
    out.mean_abs.push_back(median(gmeans));
  }
  // OLS slope of log E|D| on log lag
  const std::size_t L = out.lags.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < L; ++i) {
    double x = std::log(out.lags[i]), y = std::log(out.mean_abs[i]);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  double n = double(L);
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  double icept = (sy - slope * sx) / n;
  double rss = 0;
  for (std::size_t i = 0; i < L; ++i) {
    double r = std::log(out.mean_abs[i]) - icept - slope * std::log(out.lags[i]);
    rss += r * r;
  }
  double sxx_c = sxx - sx * sx / n;
  out.exponent = slope;
  out.ci = 1.96 * std::sqrt(rss / (n - 2) / sxx_c);
  return out;
}

Summary summarize(const std::vector<double>& v) {
  Summary s;
  s.n = v.size();
  if (v.empty()) return s;
  double m = std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  s.mean = m;
  s.sd = v.size() > 1 ? std::sqrt(ss / double(v.size() - 1)) : 0.0;
  s.se = s.sd / std::sqrt(double(v.size()));
  return s;
}

}  // namespace kpzlab
