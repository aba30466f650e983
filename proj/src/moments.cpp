// SPDX-License-Identifier: Apache-2.0
#include "kpzlab/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "kpzlab/error.hpp"

namespace kpzlab {

void IntegerPartition::validate() const {
  if (k < 1) fail(ErrorCode::invalid_argument, "partition of k < 1");
  int sum = 0;
  std::vector<int> m(static_cast<std::size_t>(k) + 1, 0);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i] < 1 || parts[i] > k) fail(ErrorCode::invalid_argument, "bad part");
    if (i > 0 && parts[i] > parts[i - 1])
      fail(ErrorCode::invalid_argument, "parts not decreasing");
    sum += parts[i];
    ++m[static_cast<std::size_t>(parts[i])];
  }
  if (sum != k) fail(ErrorCode::invalid_argument, "parts do not sum to k");
  if (m != multiplicity) fail(ErrorCode::invalid_argument, "multiplicities disagree");
}

std::vector<IntegerPartition> enumerate_partitions(int k) {
  if (k < 1 || k > 30)
    fail(ErrorCode::invalid_argument,
         "partition size must lie in [1, 30], got " + std::to_string(k));
  std::vector<IntegerPartition> out;
  std::vector<int> cur;
  // depth-first with parts bounded by the previous one
  auto rec = [&](auto&& self, int remaining, int max_part) -> void {
    if (remaining == 0) {
      IntegerPartition p;
      p.k = k;
      p.parts = cur;
      p.multiplicity.assign(static_cast<std::size_t>(k) + 1, 0);
      for (int v : cur) ++p.multiplicity[static_cast<std::size_t>(v)];
      out.push_back(std::move(p));
      return;
    }
    for (int v = std::min(remaining, max_part); v >= 1; --v) {
      cur.push_back(v);
      self(self, remaining - v, v);
      cur.pop_back();
    }
  };
  rec(rec, k, k);
  return out;
}

namespace {

struct HermiteRule {
  std::vector<double> x, w;  // physicists' weight e^{-x^2}, tiny weights dropped
};

// Golub-Welsch. Nodes whose weight is below 1e-18 of the largest are
// dropped; together they carry less than n * 1e-18 of the mass.
HermiteRule make_rule(int n) {
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(n - 1);
  for (int i = 1; i < n; ++i) sub[i - 1] = std::sqrt(i / 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success)
    fail(ErrorCode::numeric, "Gauss-Hermite eigen solve failed");
  HermiteRule r;
  double wmax = 0;
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double v0 = es.eigenvectors()(0, i);
    w[static_cast<std::size_t>(i)] = std::sqrt(std::numbers::pi) * v0 * v0;
    wmax = std::max(wmax, w[static_cast<std::size_t>(i)]);
  }
  for (int i = 0; i < n; ++i) {
    if (w[static_cast<std::size_t>(i)] < 1e-18 * wmax) continue;
    r.x.push_back(es.eigenvalues()[i]);
    r.w.push_back(w[static_cast<std::size_t>(i)]);
  }
  return r;
}

const HermiteRule& rule(int n) {
  static std::mutex mu;
  static std::map<int, HermiteRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_rule(n)).first;
  return it->second;
}

double log_factorial(int n) { return std::lgamma(n + 1.0); }

double binomial(double n, int k) {
  double r = 1;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

// One partition term of the replica formula.
class Term {
 public:
  Term(const IntegerPartition& p, double t) : parts_(p.parts), t_(t) {
    int l = int(parts_.size());
    double t13 = std::cbrt(t);
    log_pref_ = log_factorial(p.k);
    for (std::size_t j = 1; j < p.multiplicity.size(); ++j)
      log_pref_ -= log_factorial(p.multiplicity[j]);
    for (int i = 0; i < l; ++i) {
      double lam = parts_[static_cast<std::size_t>(i)];
      double a = t13 * lam;
      log_pref_ += t * lam * lam * lam / 12 - std::log(2 * std::numbers::pi) -
                   1.5 * std::log(a);
      scale_.push_back(1 / std::sqrt(a));
    }
    a2_.assign(static_cast<std::size_t>(l * l), 0.0);
    b2_.assign(static_cast<std::size_t>(l * l), 0.0);
    for (int i = 0; i < l; ++i)
      for (int j = 0; j < i; ++j) {
        double li = parts_[static_cast<std::size_t>(i)], lj = parts_[static_cast<std::size_t>(j)];
        double t23 = t13 * t13;
        a2_[static_cast<std::size_t>(i * l + j)] = t23 * (li - lj) * (li - lj) / 4;
        b2_[static_cast<std::size_t>(i * l + j)] = t23 * (li + lj) * (li + lj) / 4;
      }
  }

  double prefactor() const { return std::exp(log_pref_); }
  std::size_t dims() const { return parts_.size(); }

  // Node tuples the multiset sum visits at n nodes per axis.
  double cost(int n) const {
    double c = 1;
    std::size_t ne = rule(n).x.size();
    std::size_t i = 0;
    while (i < parts_.size()) {
      std::size_t j = i;
      while (j < parts_.size() && parts_[j] == parts_[i]) ++j;
      int m = int(j - i);
      c *= binomial(double(ne + std::size_t(m) - 1), m);
      i = j;
    }
    return c;
  }

  // Integral (without prefactor) with the n-node rule.
  double integrate(int n) const {
    const HermiteRule& r = rule(n);
    std::size_t l = parts_.size();
    std::vector<std::size_t> idx(l, 0);
    std::vector<double> z(l, 0.0);
    double sum = 0;
    rec(r, 0, 0, 1.0, 1, 1.0, idx, z, sum);
    return sum;
  }

 private:
  // weight: product of node weights times ratio factors so far.
  // run: length of the current run of equal indices within an equal-part
  // group; mult_inv accumulates 1/prod(run!) for the multinomial factor.
  void rec(const HermiteRule& r, std::size_t d, std::size_t start, double weight,
           int run, double mult_inv, std::vector<std::size_t>& idx,
           std::vector<double>& z, double& sum) const {
    std::size_t l = parts_.size();
    if (d == l) {
      sum += weight * group_factorials() * mult_inv;
      return;
    }
    bool same_group = d > 0 && parts_[d] == parts_[d - 1];
    std::size_t first = same_group ? start : 0;
    for (std::size_t q = first; q < r.x.size(); ++q) {
      double zd = r.x[q] * scale_[d];
      double w = weight * r.w[q];
      for (std::size_t e = 0; e < d; ++e) {
        double dz = zd - z[e];
        double d2 = dz * dz;
        std::size_t ij = d * l + e;
        w *= (a2_[ij] + d2) / (b2_[ij] + d2);
      }
      int nrun = (same_group && q == idx[d - 1]) ? run + 1 : 1;
      double nmult = mult_inv / (nrun > 1 ? double(nrun) : 1.0);
      idx[d] = q;
      z[d] = zd;
      rec(r, d + 1, q, w, nrun, nmult, idx, z, sum);
    }
  }

  // prod over groups of m! (multinomial numerator).
  double group_factorials() const {
    if (gf_ > 0) return gf_;
    double f = 1;
    std::size_t i = 0;
    while (i < parts_.size()) {
      std::size_t j = i;
      while (j < parts_.size() && parts_[j] == parts_[i]) ++j;
      f *= std::tgamma(double(j - i) + 1);
      i = j;
    }
    gf_ = f;
    return f;
  }

  std::vector<int> parts_;
  double t_;
  double log_pref_ = 0;
  std::vector<double> scale_;
  std::vector<double> a2_, b2_;
  mutable double gf_ = 0;
};

}  // namespace

MomentResult kardar_moment(int k, double t, const QuadSpec& spec) {
  if (k < 1 || k > 6)
    fail(ErrorCode::invalid_argument,
         "quadrature moments need 1 <= k <= 6, got " + std::to_string(k));
  if (!(t > 0) || !std::isfinite(t)) fail(ErrorCode::domain, "t must be positive");
  if (spec.initial_nodes < 2 || spec.max_nodes < 2 * spec.initial_nodes ||
      !(spec.rel_tol > 0))
    fail(ErrorCode::invalid_argument, "bad quadrature spec");

  auto parts = enumerate_partitions(k);
  struct State {
    Term term;
    int n;
    double coarse, fine;  // at n/2 and n
  };
  std::vector<State> st;
  MomentResult res;
  res.k = k;
  res.t = t;
  double used = 0;
  for (const auto& p : parts) {
    Term term(p, t);
    int n = spec.initial_nodes;
    used += term.cost(n) + term.cost(2 * n);
    double c = term.prefactor() * term.integrate(n);
    double f = term.prefactor() * term.integrate(2 * n);
    st.push_back({std::move(term), 2 * n, c, f});
  }
  // Single-part and single-dimension terms are exact once two levels agree;
  // refine the term with the largest doubling difference.
  for (;;) {
    double value = 0, err = 0;
    std::size_t worst = 0;
    double worst_err = -1;
    for (std::size_t i = 0; i < st.size(); ++i) {
      value += st[i].fine;
      double e = std::abs(st[i].fine - st[i].coarse);
      err += e;
      if (e > worst_err) {
        worst_err = e;
        worst = i;
      }
    }
    res.value = value;
    res.est_error = err;
    if (err <= spec.rel_tol * std::abs(value)) break;
    State& w = st[worst];
    int next = 2 * w.n;
    double c = w.term.cost(next);
    if (next > spec.max_nodes || used + c > spec.budget)
      fail(ErrorCode::convergence,
           "kardar_moment(k=" + std::to_string(k) + ", t=" + std::to_string(t) +
               "): doubling error " + std::to_string(err / std::abs(value)) +
               " relative exceeds tolerance " + std::to_string(spec.rel_tol) +
               " within the evaluation budget");
    used += c;
    w.coarse = w.fine;
    w.fine = w.term.prefactor() * w.term.integrate(next);
    w.n = next;
  }
  res.evaluations = static_cast<std::size_t>(used);
  for (const auto& s : st) res.max_nodes = std::max(res.max_nodes, s.n);
  return res;
}

namespace {

double logsumexp(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  double s = 0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

void check_bound_args(int k, double t) {
  if (k < 1 || k > 30)
    fail(ErrorCode::invalid_argument, "bound needs 1 <= k <= 30, got " + std::to_string(k));
  if (!(t > 0) || !std::isfinite(t)) fail(ErrorCode::domain, "t must be positive");
}

}  // namespace

double log_kardar_bound(int k, double t) {
  check_bound_args(k, t);
  std::vector<double> terms;
  double base = log_factorial(k) + t * double(k) * k * k / 12;
  for (const auto& p : enumerate_partitions(k)) {
    double v = base - 0.5 * double(p.length()) * std::log(4 * std::numbers::pi * t);
    for (std::size_t j = 1; j < p.multiplicity.size(); ++j)
      v -= log_factorial(p.multiplicity[j]);
    terms.push_back(v);
  }
  return logsumexp(terms);
}

double kardar_bound(int k, double t) { return std::exp(log_kardar_bound(k, t)); }

double log_exponential_moment_bound(int k, double t) {
  check_bound_args(k, t);
  std::vector<double> terms;
  for (const auto& p : enumerate_partitions(k)) {
    double v = 0.5 * double(k - int(p.length())) * std::log(4 * std::numbers::pi * t) +
               log_factorial(k);
    for (std::size_t j = 1; j < p.multiplicity.size(); ++j)
      v -= log_factorial(p.multiplicity[j]);
    terms.push_back(v);
  }
  return t * (double(k) * k * k - k) / 12 + logsumexp(terms);
}

ShortTimeBound short_time_uppertail_bound(double t, double s, double eps,
                                          const ShortTimeBoundConfig& cfg) {
  if (!(t > 0) || t > cfg.t0)
    fail(ErrorCode::domain, "t must lie in (0, t0 = " + std::to_string(cfg.t0) + "]");
  if (!(s >= cfg.s0))
    fail(ErrorCode::domain, "s must be at least s0 = " + std::to_string(cfg.s0));
  if (!(eps > 0) || !(eps < 1.0 / 16))
    fail(ErrorCode::domain, "eps must lie in (0, 1/16)");
  if (!(cfg.C > 0)) fail(ErrorCode::invalid_argument, "C must be positive");
  const double pi = std::numbers::pi;
  ShortTimeBound b;
  b.t = t;
  b.s = s;
  b.eps = eps;
  b.k = static_cast<long>(std::floor(s * std::pow(pi * t / 4, -0.25)));
  double tp = std::pow(t, 0.25 - 4 * eps);
  b.markov = std::exp(cfg.C * (s * s * s * tp + s * s) -
                      double(b.k) * s * std::pow(pi * t / 2, 0.25));
  double f = 1 / (cfg.C + std::sqrt(cfg.C * cfg.C + 3 * cfg.C * s * tp));
  b.simplified = std::exp(-s * s * f / 12);
  // g_t at KPZ time t: E exp(k sigma g_t) = E (Z(t,0) sqrt(2 pi t))^k with
  // sigma = (pi t/4)^{1/4}, bounded at half time t/2.
  double sigma = std::pow(pi * t / 4, 0.25);
  double best = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 30; ++k) {
    double v = log_exponential_moment_bound(k, t / 2) - k * sigma * s;
    if (v < best) {
      best = v;
      b.certified_k = k;
    }
  }
  b.certified = std::min(1.0, std::exp(best));
  return b;
}

}  // namespace kpzlab
