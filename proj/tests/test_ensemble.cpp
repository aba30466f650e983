// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "kpzlab/ensemble.hpp"
#include "kpzlab/error.hpp"
#include "kpzlab/noise.hpp"
#include "kpzlab/polymer.hpp"
#include "kpzlab/stats.hpp"

using namespace kpzlab;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

EnsembleSegment one_curve(double x, double y, int M, double a = 0,
                          double b = 1) {
  EnsembleSegment s;
  s.a = a;
  s.b = b;
  s.M = M;
  s.entrance = {x};
  s.exit = {y};
  return s;
}

std::vector<double> constant(int M, double v) {
  return std::vector<double>(static_cast<std::size_t>(M) + 1, v);
}

}  // namespace

TEST_CASE("Hamiltonians are convex, positive and increasing") {
  std::vector<double> xs;
  for (int i = -200; i <= 200; ++i) xs.push_back(i * 0.025);
  for (double t : {0.01, 0.1, 1.0, 10.0}) {
    for (auto kind : {HamiltonianKind::long_time, HamiltonianKind::short_time}) {
      auto H = make_hamiltonian(kind, t);
      CHECK(hamiltonian_is_admissible(H, xs));
      CHECK(H(-kInf) == 0);
      CHECK(H(kInf) == kInf);
    }
    CHECK(make_hamiltonian(HamiltonianKind::long_time, t).rate() ==
          doctest::Approx(std::cbrt(t)).epsilon(1e-15));
    CHECK(make_hamiltonian(HamiltonianKind::short_time, t)(1.0) ==
          doctest::Approx(std::exp(std::pow(M_PI * t / 4, 0.25))).epsilon(1e-14));
  }
  // a concave H is caught
  auto bad = custom_hamiltonian([](double x) { return std::log1p(std::exp(x)) + std::tanh(x); });
  CHECK_FALSE(hamiltonian_is_admissible(bad, xs));
  CHECK_THROWS_AS(make_hamiltonian(HamiltonianKind::long_time, 0), Error);
}

TEST_CASE("Gibbs weight evaluation") {
  auto H = make_hamiltonian(HamiltonianKind::long_time, 1);
  auto s = one_curve(0.3, -0.2, 20);
  s.paths = {std::vector<double>(21)};
  for (int j = 0; j <= 20; ++j) s.paths[0][j] = 0.3 - 0.5 * j / 20.0 + std::sin(j);
  s.paths[0].front() = 0.3;
  s.paths[0].back() = -0.2;
  // no boundaries: both terms vanish
  CHECK(gibbs_weight(s, H) == 1.0);

  // constant separation -10 under f, t = 1
  auto far = one_curve(-10, -10, 16, 0, 3);
  far.upper = constant(16, 0);
  far.paths = {constant(16, -10)};
  double W = gibbs_weight(far, H);
  CHECK(W <= 1);
  CHECK(W >= std::exp(-3 * std::exp(-10.0)) * (1 - 1e-15));
  CHECK(W == doctest::Approx(1 - 3 * std::exp(-10.0)).epsilon(1e-8));

  // +inf term kills the weight; a curve above f is penalised
  auto crossed = far;
  crossed.paths[0][5] = 5;
  CHECK(gibbs_weight(crossed, H) < W);

  // log W adds over curve pairs
  EnsembleSegment two;
  two.M = 8;
  two.entrance = {0, -1};
  two.exit = {0.5, -0.5};
  two.upper = constant(8, 1);
  two.lower = constant(8, -2);
  two.paths = {std::vector<double>(9), std::vector<double>(9)};
  for (int j = 0; j <= 8; ++j) {
    two.paths[0][j] = 0.5 * j / 8.0 + (j % 8 ? 0.1 * std::cos(j) : 0);
    two.paths[1][j] = -1 + 0.5 * j / 8.0;
  }
  auto top = one_curve(0, 0.5, 8);
  top.upper = two.upper;
  top.lower = two.paths[1];
  top.paths = {two.paths[0]};
  auto bottom = one_curve(-1, -0.5, 8);
  bottom.lower = two.lower;
  bottom.paths = {two.paths[1]};
  CHECK(log_gibbs_weight(two, H) ==
        doctest::Approx(log_gibbs_weight(top, H) + log_gibbs_weight(bottom, H))
            .epsilon(1e-13));
}

TEST_CASE("Gibbs weight converges under grid doubling") {
  auto H = make_hamiltonian(HamiltonianKind::short_time, 0.5);
  auto make = [&](int M) {
    auto s = one_curve(std::sin(0.0), std::sin(2.0), M, 0, 2);
    s.upper.resize(M + 1);
    s.lower.resize(M + 1);
    s.paths = {std::vector<double>(M + 1)};
    for (int j = 0; j <= M; ++j) {
      double x = s.grid(j);
      s.paths[0][j] = std::sin(x);
      s.upper[j] = 1 + 0.5 * std::cos(x);
      s.lower[j] = -1.5 + x * x / 4;
    }
    return s;
  };
  double l1 = log_gibbs_weight(make(2048), H);
  double l2 = log_gibbs_weight(make(4096), H);
  CHECK(std::abs(l1 - l2) < 1e-6);
  CHECK(l1 < 0);
}

TEST_CASE("segment shape errors") {
  auto H = make_hamiltonian(HamiltonianKind::long_time, 1);
  auto s = one_curve(0, 0, 8);
  s.upper = constant(7, 1);  // wrong length
  s.paths = {constant(8, 0)};
  CHECK_THROWS_AS(gibbs_weight(s, H), Error);
  s.upper = constant(8, 1);
  s.paths = {constant(8, 0)};
  s.paths[0].back() = 1;  // endpoint mismatch
  CHECK_THROWS_AS(gibbs_weight(s, H), Error);
  s.paths = {constant(8, 0)};
  s.lower = constant(8, kInf);
  CHECK_THROWS_AS(gibbs_weight(s, H), Error);
}

TEST_CASE("resampling without boundaries gives the free bridge") {
  auto H = make_hamiltonian(HamiltonianKind::long_time, 1);
  auto spec = one_curve(0.4, -0.6, 16, 0, 2);
  RngStream root(11);
  std::vector<double> mids;
  for (int r = 0; r < 3000; ++r) {
    auto res = resample_segment(spec, H, root.child(r));
    CHECK(res.attempts == 1);
    mids.push_back(res.segment.paths[0][8]);
  }
  // midpoint of a bridge over length 2: mean -0.1, variance 1/2
  CHECK(ks_normal(mids, -0.1, std::sqrt(0.5)).p_value > 0.01);
}

TEST_CASE("a low barrier pushes the curve up") {
  auto H = make_hamiltonian(HamiltonianKind::long_time, 1);
  auto spec = one_curve(0, 0, 16);
  auto barrier = spec;
  barrier.lower = constant(16, -0.3);
  RngStream root(12);
  std::vector<double> free_mid, bar_mid;
  for (int r = 0; r < 3000; ++r) {
    free_mid.push_back(resample_segment(spec, H, root.child(0).child(r)).segment.paths[0][8]);
    bar_mid.push_back(resample_segment(barrier, H, root.child(1).child(r)).segment.paths[0][8]);
  }
  auto a = summarize(free_mid), b = summarize(bar_mid);
  double se = std::sqrt(a.se * a.se + b.se * b.se);
  CHECK((b.mean - a.mean) / se > 2.33);

  // fixed stream, fixed output
  auto r1 = resample_segment(barrier, H, root.child(7));
  auto r2 = resample_segment(barrier, H, root.child(7));
  CHECK(r1.segment.paths == r2.segment.paths);
  CHECK(r1.attempts == r2.attempts);
}

TEST_CASE("rejection reproduces the hard-wall bridge") {
  // steep H against a wall at 0 below the curve
  auto wall = custom_hamiltonian([](double x) { return std::exp(400 * x); });
  auto spec = one_curve(0.3, 0.3, 16);
  spec.lower = constant(16, 0);
  RngStream root(13);
  std::vector<double> soft, hard;
  for (int r = 0; r < 3000; ++r)
    soft.push_back(resample_segment(spec, wall, root.child(0).child(r)).segment.paths[0][8]);
  // direct rejection: free grid bridges that stay above the wall
  RngStream direct = root.child(1);
  std::vector<double> path(17);
  for (std::uint64_t r = 0; hard.size() < 3000; ++r) {
    fill_bridge(0, 1, 0.3, 0.3, 16, direct.child(r), 0, path.data());
    bool ok = true;
    for (double v : path) ok = ok && v > 0;
    if (ok) hard.push_back(path[8]);
  }
  CHECK(two_sample_ks(soft, hard).p_value > 0.01);
}

TEST_CASE("retry cap reports the mean weight") {
  auto H = make_hamiltonian(HamiltonianKind::long_time, 1);
  auto spec = one_curve(0, 0, 8);
  spec.lower = constant(8, 5);  // curve forced far under g
  try {
    resample_segment(spec, H, RngStream(1), 100);
    FAIL("expected a convergence error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::convergence);
    CHECK(std::string(e.what()).find("mean weight") != std::string::npos);
  }
}

TEST_CASE("monotone coupling") {
  RngStream root(14);
  SUBCASE("identical specs give identical outputs") {
    auto H = make_hamiltonian(HamiltonianKind::long_time, 1);
    auto s = one_curve(0, 0.2, 16);
    s.lower = constant(16, -0.5);
    auto p = monotone_resample_pair(s, s, H, root, 200);
    CHECK(p.upper.paths == p.lower.paths);
  }
  SUBCASE("free bridges from ordered data stay ordered") {
    auto H = make_hamiltonian(HamiltonianKind::long_time, 1);
    for (int r = 0; r < 50; ++r) {
      auto p = monotone_resample_pair(one_curve(1, 1, 16), one_curve(0, 0, 16),
                                      H, root.child(r), 100);
      for (int j = 0; j <= 16; ++j)
        CHECK(p.upper.paths[0][j] >= p.lower.paths[0][j]);
    }
  }
  SUBCASE("active boundaries, both Hamiltonians") {
    for (auto kind : {HamiltonianKind::long_time, HamiltonianKind::short_time}) {
      auto H = make_hamiltonian(kind, 0.5);
      EnsembleSegment hi, lo;
      hi.M = lo.M = 16;
      hi.entrance = {0.5, -0.5};
      hi.exit = {0.3, -0.2};
      lo.entrance = {0.2, -0.9};
      lo.exit = {0.3, -0.6};
      hi.upper = constant(16, 1.5);
      lo.upper = constant(16, 1.0);
      hi.lower = constant(16, -1.0);
      lo.lower = constant(16, -1.5);
      int violations = 0;
      for (int r = 0; r < 300; ++r) {
        auto p = monotone_resample_pair(hi, lo, H, root.child(100 + r), 60);
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j <= 16; ++j)
            violations += p.upper.paths[i][j] < p.lower.paths[i][j];
      }
      CHECK(violations == 0);
    }
  }
  SUBCASE("misordered input is rejected") {
    auto H = make_hamiltonian(HamiltonianKind::long_time, 1);
    CHECK_THROWS_AS(monotone_resample_pair(one_curve(0, 0, 8), one_curve(1, 0, 8), H, root, 10), Error);
    auto wall = custom_hamiltonian([](double x) { return std::exp(x); });
    CHECK_THROWS_AS(monotone_resample_pair(one_curve(0, 0, 8), one_curve(0, 0, 8), wall, root, 10), Error);
  }
}

TEST_CASE("coupled chain marginal matches the exact sampler") {
  auto H = make_hamiltonian(HamiltonianKind::long_time, 1);
  auto spec = one_curve(0, 0, 16);
  spec.lower = constant(16, -0.3);
  spec.upper = constant(16, 0.6);
  RngStream root(15);
  std::vector<double> chain, exact;
    for (int r = 0; r < 1500; ++r) {
    auto p = monotone_resample_pair(spec, spec, H, root.child(0).child(r), 100);
    chain.push_back(p.upper.paths[0][8]);
    exact.push_back(resample_segment(spec, H, root.child(1).child(r)).segment.paths[0][8]);
  }
  CHECK(two_sample_ks(chain, exact).p_value > 0.01);
  // the R-hat diagnostic settles near 1 on long runs
  double mean_rhat = 0;
  for (int r = 0; r < 10; ++r)
    mean_rhat += monotone_resample_pair(spec, spec, H, root.child(2).child(r), 4000).rhat / 10;
  MESSAGE("mean split R-hat over 4000 sweeps: " << mean_rhat);
  CHECK(mean_rhat < 1.05);
}

TEST_CASE("short-time Gibbs fixed point on polymer g profiles") {
  // top curve on a small window, resampled as a free bridge (g = -inf):
  // midpoint deviation from the chord, original vs resampled. Dropping the
  // second curve loses the upward push that makes the profile concave,
  // about 0.03 at w = 4 cells, so the window is kept at w = 2.
  const double t = 0.05;
  const int n = 2000;
  auto H = make_hamiltonian(HamiltonianKind::short_time, 2 * t);
  RngStream root(16);
  std::vector<double> orig, resampled;
  for (int r = 0; r < 300; ++r) {
    auto prof = spatial_profile_g(t, n, 2.0, root.child(0).child(r));
    const int w = 2;  // window of 2w profile cells
    const std::size_t c0 = prof.size() / 2;
    for (int win = -6; win < 6; ++win) {
      std::size_t lo = c0 + win * 2 * w, hi = lo + 2 * w, mid = lo + w;
      double chord = 0.5 * (prof.values[lo] + prof.values[hi]);
      orig.push_back(prof.values[mid] - chord);
      auto spec = one_curve(prof.values[lo], prof.values[hi], 2 * w,
                            prof.x[lo], prof.x[hi]);
      auto res = resample_segment(spec, H, root.child(1).child(r).child(win + 6));
      resampled.push_back(res.segment.paths[0][w] - chord);
    }
  }
  auto ks = two_sample_ks(orig, resampled);
  MESSAGE("Gibbs fixed point KS p = " << ks.p_value);
  CHECK(ks.p_value > 0.01);
}
