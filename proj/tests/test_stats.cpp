// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "doctest.h"
#include "kpzlab/error.hpp"
#include "kpzlab/noise.hpp"
#include "kpzlab/stats.hpp"

using namespace kpzlab;

namespace {

// -log P(X >= s) = c s^p by inversion.
std::vector<double> weibull(std::size_t n, double c, double p, const RngStream& s) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = std::pow(-std::log(s.uniform(i)) / c, 1 / p);
  return v;
}

std::vector<double> normals(std::size_t n, const RngStream& s, double shift = 0) {
  std::vector<double> v(n);
  fill_normals(s, 0, n, v.data());
  for (double& x : v) x += shift;
  return v;
}

}  // namespace

TEST_CASE("two-sample KS") {
  auto a = normals(1000, RngStream(1));
  auto r = two_sample_ks(a, a);
  CHECK(r.statistic == 0);
  CHECK(r.p_value == doctest::Approx(1.0));
  auto x = normals(10000, RngStream(2)), y = normals(10000, RngStream(3), 1.0);
  CHECK(two_sample_ks(x, y).p_value < 1e-6);
  CHECK_THROWS_AS(two_sample_ks({}, a), Error);
  CHECK_THROWS_AS(ks_normal({}), Error);
}

TEST_CASE("KS p-values are uniform under the null") {
  const int reps = 1000, bins = 10;
  std::vector<int> count(bins, 0), count1(bins, 0);
  for (int r = 0; r < reps; ++r) {
    auto a = normals(500, RngStream(10).child(std::uint64_t(2 * r)));
    auto b = normals(700, RngStream(10).child(std::uint64_t(2 * r + 1)));
    double p = two_sample_ks(a, b).p_value;
    double p1 = ks_normal(a).p_value;
    ++count[std::min(bins - 1, int(p * bins))];
    ++count1[std::min(bins - 1, int(p1 * bins))];
  }
  boost::math::chi_squared chi(bins - 1);
  for (const auto* c : {&count, &count1}) {
    double x2 = 0, e = double(reps) / bins;
    for (int k : *c) x2 += (k - e) * (k - e) / e;
    CHECK(boost::math::cdf(boost::math::complement(chi, x2)) > 0.01);
  }
}

TEST_CASE("homogeneity test") {
  std::vector<std::vector<double>> same, shifted;
  for (int g = 0; g < 5; ++g) {
    same.push_back(normals(2000, RngStream(30).child(std::uint64_t(g))));
    shifted.push_back(normals(2000, RngStream(31).child(std::uint64_t(g)), 0.3 * g));
  }
  CHECK(homogeneity_p_value(same, 20) > 0.01);
  CHECK(homogeneity_p_value(shifted, 20) < 1e-6);
}

TEST_CASE("Paley-Zygmund") {
  std::vector<double> e(100000);
  RngStream s(40);
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = -std::log(s.uniform(i));
  auto r = paley_zygmund(e, 0.5);
  CHECK(r.lower_bound == doctest::Approx(0.125).epsilon(0.02));
  CHECK(r.p_hat == doctest::Approx(std::exp(-0.5)).epsilon(0.01));
  CHECK(r.holds);
  CHECK_THROWS_AS(paley_zygmund(e, 1.5), Error);
  CHECK_THROWS_AS(paley_zygmund({1.0, -1.0}, 0.5), Error);
  // property: holds on arbitrary positive samples
  for (std::uint64_t t = 0; t < 200; ++t) {
    RngStream st = RngStream(41).child(t);
    std::size_t n = 50 + std::size_t(st.uniform(0) * 2000);
    double shape = 0.2 + 3 * st.uniform(1);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = std::pow(-std::log(st.uniform(i + 2)), shape) + 1e-12;
    double delta = 0.05 + 0.9 * st.uniform(n + 5);
    CHECK(paley_zygmund(v, delta).holds);
  }
}

TEST_CASE("tail fit: Weibull 3/2") {
  auto w = weibull(1000000, 4 * std::sqrt(2.0) / 3, 1.5, RngStream(50));
  auto f = fit_tail(w, TailSide::upper, 0.5, 10);
  CHECK(f.p_hat == doctest::Approx(1.5).epsilon(0.05 / 1.5));
  CHECK(std::abs(f.c_hat - 1.8856) < 0.1);
  CHECK(f.p_hat > 0);
  for (auto k : f.exceedances) CHECK(k >= 30);
  // lower side of -w is the same fit
  std::vector<double> m(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) m[i] = -w[i];
  auto g = fit_tail(m, TailSide::lower, 0.5, 10);
  CHECK(g.p_hat == doctest::Approx(f.p_hat).epsilon(1e-9));
}

TEST_CASE("tail fit: exponential") {
  auto e = weibull(1000000, 1.0, 1.0, RngStream(51));
  auto f = fit_tail(e, TailSide::upper, 1, 30);
  CHECK(std::abs(f.p_hat - 1) < 0.05);
}

TEST_CASE("tail fit: Gaussian") {
  auto g = normals(10000000, RngStream(52));
  auto f = fit_tail(g, TailSide::upper, 1.5, 10);
  CAPTURE(f.p_hat);
  CAPTURE(f.loglog_p);
  CHECK(std::abs(f.p_hat - 2) < 0.1);
}

TEST_CASE("tail fit refusals") {
  CHECK_THROWS_AS(fit_tail(normals(1000, RngStream(1)), TailSide::upper, 1, 3), Error);
  auto g = normals(100000, RngStream(53));
  // no threshold beyond 8 has 30 exceedances
  CHECK_THROWS_AS(fit_tail(g, TailSide::upper, 8, 10), Error);
}

TEST_CASE("tail fit CI coverage") {
  int covered = 0;
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    auto w = weibull(100000, 1.8856, 1.5, RngStream(60).child(std::uint64_t(t)));
    auto f = fit_tail(w, TailSide::upper, 0.5, 10);
    covered += std::abs(f.p_hat - 1.5) <= f.p_ci;
  }
  CAPTURE(covered);
  CHECK(covered >= 90);
}

TEST_CASE("LIL tracking") {
  std::vector<double> times, zero, gauge;
  for (double t = std::exp(std::exp(1.0)); t <= 1000; t *= 1.05) {
    times.push_back(t);
    zero.push_back(0);
    gauge.push_back(std::pow(std::log(std::log(t)), 2.0 / 3.0));
  }
  auto a = track_lil(times, zero);
  for (double v : a.running_max) CHECK(v == 0);
  CHECK(a.upper_reference == doctest::Approx(0.6552).epsilon(1e-4));
  CHECK(a.lower_reference == doctest::Approx(-1.8171).epsilon(1e-4));
  auto b = track_lil(times, gauge);
  for (double v : b.running_max) CHECK(v == doctest::Approx(1.0));
  for (std::size_t i = 1; i < b.running_min.size(); ++i) {
    CHECK(b.running_max[i] >= b.running_max[i - 1]);
    CHECK(b.running_min[i] <= b.running_min[i - 1]);
  }
  CHECK_THROWS_AS(track_lil({2.0, 20.0}, {0.0, 0.0}), Error);
  CHECK(lil_upper_constant() == doctest::Approx(std::pow(3 / (4 * std::sqrt(2.0)), 2.0 / 3)));
  CHECK(lil_lower_constant() == doctest::Approx(-std::cbrt(6.0)));
}

TEST_CASE("Holder exponent of Brownian paths") {
  const std::size_t reps = 1000, len = 1025;
  std::vector<std::vector<double>> paths(reps, std::vector<double>(len, 0.0));
  std::vector<double> z(len - 1);
  for (std::size_t r = 0; r < reps; ++r) {
    fill_normals(RngStream(70).child(r), 0, z.size(), z.data());
    for (std::size_t i = 1; i < len; ++i)
      paths[r][i] = paths[r][i - 1] + z[i - 1] / std::sqrt(double(len - 1));
  }
  std::vector<int> lags;
  for (int k = 1; k <= 128; ++k) lags.push_back(k);
  auto f = fit_holder(paths, 1.0 / double(len - 1), lags);
  CHECK(std::abs(f.exponent - 0.5) < 0.03);
  CHECK_THROWS_AS(fit_holder(paths, 0.1, {1, 2, 3}), Error);
}

TEST_CASE("summary") {
  auto s = summarize({1.0, 2.0, 3.0, 4.0});
  CHECK(s.mean == 2.5);
  CHECK(s.sd == doctest::Approx(std::sqrt(5.0 / 3)));
}
