// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "kpzlab/error.hpp"
#include "kpzlab/fractal.hpp"

using namespace kpzlab;

namespace {

// Minimal cover over every contiguous partition of the sorted points.
double brute_content(std::vector<double> pts, int n, double rho) {
  std::sort(pts.begin(), pts.end());
  const int m = static_cast<int>(pts.size());
  if (m == 0) return 0;
  const double scale = std::exp(double(n));
  std::vector<std::vector<double>> c(m, std::vector<double>(m));
  for (int a = 0; a < m; ++a)
    for (int b = a; b < m; ++b)
      c[a][b] = std::pow(std::max(pts[b] - pts[a], 1.0) / scale, rho);
  double best = std::numeric_limits<double>::infinity();
  for (unsigned long cuts = 0; cuts < (1UL << (m - 1)); ++cuts) {
    double cost = 0;
    int start = 0;
    for (int i = 0; i < m; ++i) {
      if (i == m - 1 || (cuts >> i & 1)) {
        cost += c[start][i];
        start = i + 1;
      }
    }
    best = std::min(best, cost);
  }
  return best;
}

std::vector<double> grid_set(double theta, int n0, int n1) {
  std::vector<double> out;
  for (int n = n0; n <= n1; ++n)
    for (double x : thickness_grid(n, theta)) out.push_back(x);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> random_slot_set(double a, int n0, int n1,
                                    std::mt19937_64& gen) {
  std::vector<double> out;
  std::uniform_real_distribution<double> u(0, 1);
  for (int n = n0; n <= n1; ++n) {
    double p = std::exp(-a * n);
    long lo = static_cast<long>(std::ceil(std::exp(double(n))));
    long hi = static_cast<long>(std::ceil(std::exp(double(n + 1))));
    for (long k = lo; k < hi; ++k)
      if (u(gen) < p) out.push_back(double(k));
  }
  return out;
}

}  // namespace

TEST_CASE("shell content small cases") {
  for (int n : {2, 5, 9}) {
    double e = std::exp(double(n));
    for (double rho : {0.3, 0.7, 1.0}) {
      CHECK(shell_content({e * 1.5}, n, rho) ==
            doctest::Approx(std::exp(-n * rho)).epsilon(1e-14));
      CHECK(shell_content({e * 1.5, e * 1.5 + 0.8}, n, rho) ==
            doctest::Approx(std::exp(-n * rho)).epsilon(1e-14));
      CHECK(shell_content({}, n, rho) == 0);
      // points outside the shell do not count
      CHECK(shell_content({e * 0.5, e * 3}, n, rho) == 0);
      // negative half-shell
      CHECK(shell_content({-e * 1.5}, n, rho) ==
            doctest::Approx(std::exp(-n * rho)).epsilon(1e-14));
    }
  }
  CHECK_THROWS_AS(shell_content({10}, 2, 0), Error);
  CHECK_THROWS_AS(shell_content({10}, 2, 1.5), Error);
}

TEST_CASE("cover DP equals brute force") {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> u(0, 1);
  SUBCASE("20 points at rho = 0.7") {
    const int n = 3;
    std::vector<double> pts;
    for (int i = 0; i < 20; ++i)
      pts.push_back(std::exp(3.0) + u(gen) * (std::exp(4.0) - std::exp(3.0)));
    CHECK(shell_content(pts, n, 0.7) ==
          doctest::Approx(brute_content(pts, n, 0.7)).epsilon(1e-12));
  }
  SUBCASE("1000 random shells of up to 20 points") {
    int mismatches = 0;
    for (int c = 0; c < 1000; ++c) {
      int n = 1 + static_cast<int>(u(gen) * 4);
      int m = 1 + static_cast<int>(u(gen) * 20);
      double rho = 0.05 + 0.95 * u(gen);
      double lo = std::exp(double(n)), hi = std::exp(double(n + 1));
      // a few clusters so that merging decisions matter
      std::vector<double> pts;
      int clusters = 1 + static_cast<int>(u(gen) * 4);
      std::vector<double> centres;
      for (int k = 0; k < clusters; ++k) centres.push_back(lo + u(gen) * (hi - lo));
      for (int i = 0; i < m; ++i) {
        double x = centres[i % clusters] + (u(gen) - 0.5) * 3 * u(gen) * (hi - lo) / 4;
        pts.push_back(std::clamp(x, lo, std::nextafter(hi, 0.0)));
      }
      double dp = shell_content(pts, n, rho);
      double bf = brute_content(pts, n, rho);
      mismatches += std::abs(dp - bf) > 1e-12 * bf;
    }
    CHECK(mismatches == 0);
  }
}

TEST_CASE("content monotonicity properties") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0, 1);
  const int n = 4;
  const double lo = std::exp(4.0), hi = std::exp(5.0);
  for (int c = 0; c < 200; ++c) {
    std::vector<double> pts;
    int m = 1 + static_cast<int>(u(gen) * 60);
    for (int i = 0; i < m; ++i) pts.push_back(lo + u(gen) * (hi - lo));
    // adding points never lowers the content
    auto more = pts;
    more.push_back(lo + u(gen) * (hi - lo));
    for (double rho : {0.3, 0.6, 1.0})
      CHECK(shell_content(more, n, rho) >= shell_content(pts, n, rho) * (1 - 1e-14));
    // in rho: cover lengths are at most (e - 1) e^n, so raising rho by d
    // scales any cover term by at most (e - 1)^d
    double prev = shell_content(pts, n, 0.1);
    for (int k = 2; k <= 10; ++k) {
      double cur = shell_content(pts, n, 0.1 * k);
      CHECK(cur <= prev * std::pow(std::numbers::e - 1, 0.1) * (1 + 1e-12));
      prev = cur;
    }
  }
  // strictly nonincreasing when the set spans less than e^n
  std::vector<double> narrow;
  for (int i = 0; i < 40; ++i) narrow.push_back(lo + u(gen) * (lo * 0.9));
  double prev = shell_content(narrow, n, 0.05);
  for (int k = 2; k <= 20; ++k) {
    double cur = shell_content(narrow, n, 0.05 * k);
    CHECK(cur <= prev * (1 + 1e-14));
    prev = cur;
  }
}

TEST_CASE("dimension of synthetic sets") {
  SUBCASE("grid set theta = 0.5") {
    auto rep = estimate_dimension(grid_set(0.5, 4, 14), 4, 14);
    MESSAGE("grid: regression " << rep.dimension << " bisection " << rep.bisection);
    CHECK(rep.dimension == doctest::Approx(0.5).epsilon(0).scale(1).epsilon(0.05));
    CHECK(std::abs(rep.dimension - 0.5) <= 0.05);
    CHECK(std::abs(rep.bisection - 0.5) <= 0.1);
    CHECK(rep.ci_low <= rep.dimension);
    CHECK(rep.dimension <= rep.ci_high);
    // contents weakly ordered by construction of the grid
    for (auto& s : rep.shells) CHECK(s.count > 0);
  }
  SUBCASE("random slot set a = 0.4") {
    std::mt19937_64 gen(99);
    auto pts = random_slot_set(0.4, 4, 14, gen);
    auto rep = estimate_dimension(pts, 4, 14);
    MESSAGE("random slots: regression " << rep.dimension << " bisection " << rep.bisection);
    CHECK(std::abs(rep.dimension - 0.6) <= 0.07);
  }
  SUBCASE("bounded set") {
    std::vector<double> pts;
    for (int i = 0; i < 30; ++i) pts.push_back(std::exp(3.0) + i);
    auto rep = estimate_dimension(pts, 4, 14);
    CHECK(rep.method == DimensionMethod::bounded);
    CHECK(rep.dimension == 0);
  }
  SUBCASE("one point per shell") {
    std::vector<double> pts;
    for (int n = 4; n <= 14; ++n) pts.push_back(std::exp(n + 0.5));
    auto rep = estimate_dimension(pts, 4, 14);
    CHECK(rep.dimension == doctest::Approx(0).epsilon(1e-9).scale(1));
  }
  SUBCASE("dense ray") {
    const int N = 11;
    std::vector<double> pts;
    for (double x = std::ceil(std::exp(4.0)); x <= std::exp(double(N)); x += 1) pts.push_back(x);
    auto rep = estimate_dimension(pts, 4, N - 1);
    MESSAGE("dense ray: regression " << rep.dimension << " bisection " << rep.bisection);
    CHECK(std::abs(rep.dimension - 1) <= 0.05);
    for (double theta : {0.1, 0.3, 0.5, 0.9}) {
      auto cert = thickness_check(pts, theta, 4, N - 1);
      CHECK(cert.pass);
      CHECK(rep.dimension >= 1 - theta - 0.05);
    }
  }
  SUBCASE("too few shells") {
    std::vector<double> pts{std::exp(4.5), std::exp(5.5)};
    CHECK_THROWS_AS(estimate_dimension(pts, 4, 14), Error);
  }
}

TEST_CASE("thickness certificate") {
  auto pts = grid_set(0.5, 4, 14);
  auto yes = thickness_check(pts, 0.5, 4, 14);
  CHECK(yes.pass);
  CHECK(yes.implied_lower == 0.5);
  auto no = thickness_check(pts, 0.4, 4, 14);
  CHECK_FALSE(no.pass);
  for (auto& s : no.shells) CHECK_FALSE(s.pass);
  auto rep = estimate_dimension(pts, 4, 14);
  CHECK(rep.dimension >= 1 - 0.5 - 0.05);
  auto empty = thickness_check({}, 0.5, 4, 8);
  CHECK_FALSE(empty.pass);
  for (auto& s : empty.shells) CHECK_FALSE(s.pass);
  CHECK_THROWS_AS(thickness_check(pts, 1.0, 4, 5), Error);
}

TEST_CASE("Frostman lower bound") {
  const int n = 5;
  const double lo = std::exp(5.0);
  for (double rho : {0.5, 0.7, 1.0}) {
    // 5 points 8 apart: ((k-1) 8)^rho >= k for k <= 5, so no merge helps
    // and K = 1
    std::vector<double> pts, w;
    for (int i = 0; i < 5; ++i) { pts.push_back(lo + 1 + 8 * i); w.push_back(1); }
    double nu = shell_content(pts, n, rho);
    CHECK(nu == doctest::Approx(5 * std::exp(-n * rho)).epsilon(1e-12));
    CHECK(frostman_lower(pts, w, n, rho) == doctest::Approx(nu).epsilon(1e-12));
    // clusters of 1..5 points 0.6 apart: K comes from the densest one,
    // the others leave slack
    std::vector<double> cl, cw;
    for (int c = 1; c <= 5; ++c)
      for (int i = 0; i < c; ++i) { cl.push_back(lo + 40 * c + 0.6 * i); cw.push_back(1); }
    CHECK(frostman_lower(cl, cw, n, rho) < shell_content(cl, n, rho));
    // zero measure
    CHECK(frostman_lower(pts, std::vector<double>(pts.size(), 0.0), n, rho) == 0);
  }
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0, 1);
  int violations = 0;
  for (int c = 0; c < 1000; ++c) {
    int m = 1 + static_cast<int>(u(gen) * 40);
    double rho = 0.05 + 0.95 * u(gen);
    std::vector<double> pts, w;
    for (int i = 0; i < m; ++i) {
      pts.push_back(lo + u(gen) * (std::exp(6.0) - lo) * std::pow(u(gen), 3));
      w.push_back(u(gen) * 3);
    }
    violations += frostman_lower(pts, w, n, rho) > shell_content(pts, n, rho) * (1 + 1e-12);
  }
  CHECK(violations == 0);
  CHECK_THROWS_AS(frostman_lower({lo + 1}, {-1}, n, 1), Error);
}

TEST_CASE("level set extraction") {
  std::vector<double> t, v;
  const double t0 = std::exp(std::numbers::e);
  for (int i = 0; i < 200; ++i) {
    t.push_back(t0 + 5 * i);
    v.push_back(std::sin(0.1 * i));
  }
  auto all = extract_level_set(t, v, Gauge::loglog_two_thirds,
                               -std::numeric_limits<double>::infinity());
  CHECK(all.points == t);
  CHECK(extract_level_set(t, v, Gauge::loglog_one_third, 10).points.empty());

  // constructed crossings: value = gamma * gauge + (+-0.1) on known times
  std::vector<double> expect;
  for (std::size_t i = 0; i < t.size(); ++i) {
    double g = std::pow(std::log(std::log(t[i])), 2.0 / 3);
    bool in = (i / 17) % 2 == 0;
    v[i] = 0.5 * g + (in ? 0.1 : -0.1);
    if (in) expect.push_back(t[i]);
  }
  auto ls = extract_level_set(t, v, Gauge::loglog_two_thirds, 0.5);
  CHECK(ls.points == expect);
  CHECK(ls.gauge == "loglog23");

  // exp-time gauge returns s = log t
  std::vector<double> tt{std::exp(16.0), std::exp(20.0), std::exp(30.0)};
  std::vector<double> vv{100, -100, 100};
  auto ex = extract_level_set(tt, vv, Gauge::exp_time, 0.5);
  REQUIRE(ex.points.size() == 2);
  CHECK(ex.points[0] == doctest::Approx(16.0));
  CHECK(ex.points[1] == doctest::Approx(30.0));

  CHECK_THROWS_AS(extract_level_set({5.0}, {1.0}, Gauge::loglog_two_thirds, 0), Error);
  CHECK_THROWS_AS(extract_level_set({100.0}, {1.0}, Gauge::exp_time, 0), Error);
  CHECK(parse_gauge("loglog13") == Gauge::loglog_one_third);
  CHECK_THROWS_AS(parse_gauge("x"), Error);
  CHECK_THROWS_AS(make_point_set({0.5}), Error);
  CHECK(make_point_set({3, 2, 3}).points == std::vector<double>{2, 3});
}
