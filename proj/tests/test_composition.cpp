// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "kpzlab/composition.hpp"
#include "kpzlab/error.hpp"
#include "kpzlab/noise.hpp"
#include "kpzlab/she.hpp"
#include "kpzlab/stats.hpp"

using namespace kpzlab;

namespace {

// Noise-free h_tau(alpha, .): log of the heat kernel in the h scaling.
SpatialProfile heat_profile(double tau, double alpha, double dx, double half) {
  SpatialProfile p;
  p.regime = Regime::h;
  p.t = tau;
  p.alpha = alpha;
  double c = std::cbrt(tau);
  long J = std::lround(half / dx);
  for (long j = -J; j <= J; ++j) {
    double x = double(j) * dx;
    p.x.push_back(x);
    p.values.push_back((std::log(heat_kernel(alpha * tau, c * c * x)) + alpha * tau / 24) / c);
  }
  return p;
}

double heat_h(double tau, double alpha) {
  return (std::log(heat_kernel(alpha * tau, 0)) + alpha * tau / 24) / std::cbrt(tau);
}

}  // namespace

TEST_CASE("Chapman-Kolmogorov through the composition map") {
  struct Case { double tau, a1, a2; };
  for (Case c : {Case{1.0, 1.0, 0.5}, Case{0.5, 1.0, 2.0}, Case{3.0, 1.0, 1.0}}) {
    auto f = heat_profile(c.tau, c.a1, 0.01, 12);
    auto g = heat_profile(c.tau, c.a2, 0.01, 12);
    double I = compose(f, g, c.tau);
    double want = heat_h(c.tau, c.a1 + c.a2);
    double k = std::cbrt(c.tau);
    CAPTURE(c.tau);
    CHECK(std::abs(std::exp(k * (I - want)) - 1) < 1e-8);
    // refining the profile grid moves the result by less than 1e-6
    auto f2 = heat_profile(c.tau, c.a1, 0.005, 12);
    auto g2 = heat_profile(c.tau, c.a2, 0.005, 12);
    CHECK(std::abs(compose(f2, g2, c.tau) - I) < 1e-6);
  }
}

TEST_CASE("shift covariance and reflection symmetry") {
  auto f = sample_profile(SourceConfig{}, 1.0, 1.0, RngStream(1));
  auto g = sample_profile(SourceConfig{}, 1.0, 0.7, RngStream(2));
  double I = compose(f, g, 1.0);
  auto fc = f;
  for (double& v : fc.values) v += 0.37;
  CHECK(compose(fc, g, 1.0) == doctest::Approx(I + 0.37).epsilon(1e-13));
  auto neg = [](SpatialProfile p) {
    std::reverse(p.values.begin(), p.values.end());
    return p;
  };
  // swapping roles needs the alphas kept with their curves
  CHECK(compose(neg(g), neg(f), 1.0) == I);
}

TEST_CASE("coverage is enforced") {
  auto f = heat_profile(1.0, 1.0, 0.05, 2.0);
  auto g = heat_profile(1.0, 1.0, 0.05, 2.0);
  CHECK_THROWS_AS(compose(f, g, 1.0), Error);
  CHECK_THROWS_AS(compose(f, g, 1.0, 50.0), Error);
  auto gg = g;
  gg.regime = Regime::g;
  CHECK_THROWS_AS(compose(f, gg, 1.0, 1.0), Error);
}

TEST_CASE("SHE chain reproduces the forward field") {
  SourceConfig src;
  auto ch = sample_chain(1.0, {1.5, 2.5, 3.0}, src, RngStream(7));
  REQUIRE(ch.outputs.size() == 4);
  REQUIRE(ch.profiles.size() == 4);
  for (std::size_t i = 0; i < ch.outputs.size(); ++i) {
    CAPTURE(i);
    CHECK(ch.outputs[i] == doctest::Approx(ch.direct[i]).epsilon(1e-9));
  }
  auto again = sample_chain(1.0, {1.5, 2.5, 3.0}, src, RngStream(7));
  CHECK(again.outputs == ch.outputs);
  CHECK_THROWS_AS(sample_chain(1.0, {0.5}, src, RngStream(7)), Error);
  SourceConfig poly;
  poly.kind = ProfileSource::polymer;
  poly.polymer_n = 400;
  CHECK_THROWS_AS(sample_chain(1.0, {1.5, 2.0}, poly, RngStream(7)), Error);
  auto pc = sample_chain(1.0, {2.0}, poly, RngStream(7));
  CHECK(std::isfinite(pc.outputs[1]));
}

TEST_CASE("composed one-point law matches the direct law") {
  SourceConfig src;
  const std::size_t N = 3000;
  auto chk = g_compose_check(1.0, 1.0, N, src, RngStream(11), 0);
  CAPTURE(chk.ks.statistic);
  CHECK(chk.ks.p_value > 0.01);
  std::vector<double> composed(N), direct(N);
  SheGrid g = make_she_grid(2.0, src.dx);
  g.half_width = std::ceil(src.coverage * std::sqrt(2.0) / src.dx) * src.dx;
  for (std::size_t r = 0; r < N; ++r) {
    composed[r] = compose_one_point(1.0, 2.0, src, RngStream(12).child(r));
    direct[r] = sample_h_trajectory(1.0, {2.0}, g, RngStream(13).child(r)).values[0];
  }
  CHECK(two_sample_ks(composed, direct).p_value > 0.01);
}

TEST_CASE("FKG cell") {
  std::vector<double> a(20000), b(20000), c(20000);
  fill_normals(RngStream(20), 0, a.size(), a.data());
  fill_normals(RngStream(21), 0, b.size(), b.data());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = 0.7 * a[i] + 0.3 * b[i];
  auto ind = fkg_cell(a, b, 0.5, 0.5);
  CHECK(ind.holds);
  CHECK(std::abs(ind.gap) < 4 * ind.se);
  auto pos = fkg_cell(a, c, 0.5, 0.5);
  CHECK(pos.gap > 10 * pos.se);
  std::vector<double> neg(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) neg[i] = -a[i];
  CHECK_FALSE(fkg_cell(a, neg, 0.0, 0.0).holds);
}

TEST_CASE("decoupling improves with the gap ratio") {
  auto rows = decoupling_report(1.0, {0.5, 2.0, 8.0}, {0.1, 0.2, 0.4}, 1500,
                                SourceConfig{}, RngStream(30), 0);
  REQUIRE(rows.size() == 3);
  for (std::size_t x = 0; x < 3; ++x) {
    CAPTURE(x);
    CHECK(rows[1].exceed[x] <= rows[0].exceed[x]);
    CHECK(rows[2].exceed[x] <= rows[1].exceed[x]);
  }
}
