// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "kpzlab/error.hpp"
#include "kpzlab/polymer.hpp"
#include "kpzlab/stats.hpp"

using namespace kpzlab;

namespace {

// Sum over all 2^n paths of 2^{-n} exp(beta sum E(i, S_i)) grouped by endpoint.
std::vector<double> brute_force_z(int n, double beta, const RngStream& s) {
  auto env = make_environment(n, s);
  std::vector<double> z(static_cast<std::size_t>(2 * n + 1), 0.0);
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    int x = 0;
    double e = 0;
    for (int i = 1; i <= n; ++i) {
      x += (mask >> (i - 1)) & 1 ? 1 : -1;
      e += env(i, x);
    }
    z[static_cast<std::size_t>(x + n)] += std::exp(beta * e) / double(1u << n);
  }
  return z;
}

// Brute-force overlap numerator over all pairs of pinned paths.
double brute_force_overlap(int n, double beta, const RngStream& s) {
  auto env = make_environment(n, s);
  std::vector<std::vector<int>> paths;
  std::vector<double> weight;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    std::vector<int> p(n + 1, 0);
    double e = 0;
    for (int i = 1; i <= n; ++i) {
      p[i] = p[i - 1] + ((mask >> (i - 1)) & 1 ? 1 : -1);
      e += env(i, p[i]);
    }
    if (p[n] != 0) continue;
    paths.push_back(p);
    weight.push_back(std::exp(beta * e) / double(1u << n));
  }
  double z = 0, num = 0;
  for (double w : weight) z += w;
  for (std::size_t a = 0; a < paths.size(); ++a)
    for (std::size_t b = 0; b < paths.size(); ++b) {
      int L = 0;
      for (int i = 1; i <= n; ++i) L += paths[a][i] == paths[b][i];
      num += L * weight[a] * weight[b];
    }
  return num / (z * z);
}

}  // namespace

TEST_CASE("free walk partition functions") {
  RngStream s(1);
  auto r2 = run_polymer(2, 0.0, s);
  CHECK(std::exp(r2.log_z(0)) == doctest::Approx(0.5).epsilon(1e-14));
  auto r4 = run_polymer(4, 0.0, s);
  CHECK(std::exp(r4.log_z(0)) == doctest::Approx(0.375).epsilon(1e-14));
  auto r = run_polymer(30, 0.0, s);
  for (int x = -32; x <= 32; ++x) {
    bool reachable = std::abs(x) <= 30 && (x + 30) % 2 == 0;
    CHECK(std::isfinite(r.log_z(x)) == reachable);
    if (reachable)
      CHECK(std::abs(std::exp(r.log_z(x)) -
                     std::exp(log_walk_probability(30, x))) < 1e-12);
  }
  CHECK_THROWS_AS(run_polymer(5, 0.1, s), Error);
  CHECK_THROWS_AS(run_polymer(0, 0.1, s), Error);
}

TEST_CASE("transfer matrix equals exhaustive path sums") {
  RngStream root(2);
  for (int c = 0; c < 30; ++c) {
    int n = 2 + 2 * (c % 5);  // 2..10
    double beta = 0.1 + 0.05 * c;
    auto s = root.child(c);
    auto z = brute_force_z(n, beta, s);
    auto run = run_polymer(n, beta, s);
    for (int x = -n; x <= n; x += 2) {
      double bf = std::log(z[static_cast<std::size_t>(x + n)]);
      CHECK(std::abs(run.log_z(x) - bf) < 1e-10);
    }
    auto fast = pinned_log_z(n, beta, n, s);
    for (int y = -n, j = 0; y <= n; y += 2, ++j)
      CHECK(std::abs(fast[j] - run.log_z(y)) < 1e-10);
  }
  // n = 6, beta = 0.3
  auto s = root.child(99);
  auto z = brute_force_z(6, 0.3, s);
  CHECK(std::abs(std::exp(run_polymer(6, 0.3, s).log_z(0)) - z[6]) < 1e-10);
}

TEST_CASE("fast pinned kernel matches the log-domain recursion") {
  RngStream root(3);
  for (int n : {200, 1000}) {
    double beta = polymer_beta(0.5, n);
    auto run = run_polymer(n, beta, root.child(n));
    auto fast = pinned_log_z(n, beta, 20, root.child(n));
    for (int y = -20, j = 0; y <= 20; y += 2, ++j)
      CHECK(std::abs(fast[j] - run.log_z(y)) < 1e-9);
  }
}

TEST_CASE("statistic centring and determinism") {
  double t = 0.3;
  int n = 100;
  double beta = polymer_beta(t, n);
  CHECK(beta == doctest::Approx(std::pow(t / 200, 0.25)));
  CHECK(g_statistic(t, n, log_mean_z(n, beta)) == 0.0);
  auto a = sample_g(t, n, RngStream(4));
  auto b = sample_g(t, n, RngStream(4));
  CHECK(a.value == b.value);
  CHECK(a.beta == beta);
  CHECK(a.kpz_time() == doctest::Approx(0.6));
}

TEST_CASE("normalizer identity: E Z_n(0) is analytic") {
  const int n = 20;
  const double beta = 0.5;
  const std::size_t N = 100000;
  RngStream root(5);
  double s1 = 0, s2 = 0;
  for (std::size_t r = 0; r < N; ++r) {
    double z = std::exp(pinned_log_z(n, beta, 0, root.child(r))[0]);
    s1 += z;
    s2 += z * z;
  }
  double mean = s1 / N, var = s2 / N - mean * mean;
  double target = std::exp(log_mean_z(n, beta));
  CHECK(std::abs(mean - target) < 4 * std::sqrt(var / N));
}

TEST_CASE("profiles") {
  RngStream s(6);
  auto p0 = spatial_profile_g(0.2, 400, 1.5, s, 0.0);
  CHECK(p0.regime == Regime::g);
  CHECK(p0.t == doctest::Approx(0.4));
  const std::size_t m = p0.size();
  CHECK(m % 2 == 1);
  double scale = std::pow(std::numbers::pi * 0.2 / 2, -0.25);
  for (std::size_t j = 0; j < m; ++j) {
    CHECK(std::abs(p0.values[j] - p0.values[m - 1 - j]) < 1e-12);
    int y = static_cast<int>(std::lround(p0.x[j] * std::sqrt(std::numbers::pi * 400) / 2));
    double expect = (log_walk_probability(400, y) - log_walk_probability(400, 0)) * scale;
    CHECK(std::abs(p0.values[j] - expect) < 1e-10);
  }
  auto pa = spatial_profile_g(0.2, 400, 1.5, s);
  auto pb = spatial_profile_g(0.2, 400, 1.5, s);
  CHECK(pa.values == pb.values);
  CHECK_THROWS_AS(spatial_profile_g(0.2, 100, 20.0, s), Error);

  auto ph = spatial_profile_h(1.0, 1.0, 400, 2.0, s);
  CHECK(ph.regime == Regime::h);
  ph.validate();
}

TEST_CASE("recentred short-time profile is stationary in x") {
  // KPZ time 0.1; points x in {-1, -0.5, 0, 0.5, 1}
  const double t = 0.05;
  const int n = 800;
  const std::size_t R = 3000;
  std::vector<std::vector<double>> at(5);
  RngStream root(7);
  for (std::size_t r = 0; r < R; ++r) {
    auto p = recenter(spatial_profile_g(t, n, 1.2, root.child(r)));
    for (int q = 0; q < 5; ++q) at[q].push_back(p.at(-1.0 + 0.5 * q));
  }
  CHECK(homogeneity_p_value(at, 10) > 0.01);
}

TEST_CASE("two-replica overlap") {
  RngStream s(8);
  CHECK(two_replica_overlap(2, 0.0, s) == doctest::Approx(1.5).epsilon(1e-14));
  for (int n : {2, 4, 6, 8}) {
    for (double beta : {0.0, 0.3, 0.8}) {
      CHECK(two_replica_overlap(n, beta, s) ==
            doctest::Approx(brute_force_overlap(n, beta, s)).epsilon(1e-10));
    }
  }
  CHECK(two_replica_overlap(100, 0.2, s) == two_replica_overlap(100, 0.2, s));
  CHECK_THROWS_AS(two_replica_overlap(602, 0.1, s), Error);
  try {
    two_replica_overlap(602, 0.1, s);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::size);
  }
  // beta = (t / 2n)^{1/4}: overlap / sqrt(n) stays of order one
  for (int n : {100, 200, 400, 600}) {
    double acc = 0;
    for (int r = 0; r < 5; ++r)
      acc += two_replica_overlap(n, polymer_beta(1.0, n), s.child(n * 10 + r));
    double ratio = acc / 5 / std::sqrt(double(n));
    CHECK(ratio > 1.0);
    CHECK(ratio < 4.0);
  }
}

TEST_CASE("sample_g is consistent across n at t = 1") {
  const std::size_t R = 2000;
  auto a = sample_g_batch(1.0, 1000, RngStream(9), R, 0);
  auto b = sample_g_batch(1.0, 4000, RngStream(10), R, 0);
  CHECK(two_sample_ks(a, b).p_value > 0.01);
}
