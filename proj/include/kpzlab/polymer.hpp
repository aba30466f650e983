// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "kpzlab/noise.hpp"
#include "kpzlab/profile.hpp"

namespace kpzlab {

// Point-to-point partition functions of a simple random walk of length n
// in the disorder E(i, x): Z_n(x) = E[exp(beta sum_i E(i, S_i)) 1{S_n = x}].
struct PolymerRun {
  int n = 0;
  double beta = 0;
  RngStream env_stream;
  std::vector<double> log_z_reachable;  // index k <-> endpoint x = -n + 2k

  //! log Z_n(x); -inf off the reachable set.
  double log_z(int x) const;
};

// Intermediate-disorder inverse temperature (t / 2n)^{1/4}.
double polymer_beta(double t, int n);

// log E Z_n(0) = n beta^2 / 2 + log P(S_n = 0).
double log_mean_z(int n, double beta);

// log P(S_n = x) for the simple random walk.
double log_walk_probability(int n, int x);

// Log-domain transfer matrix over all endpoints.
PolymerRun run_polymer(int n, double beta, const RngStream& stream);

// log Z_n(y) for even |y| <= y_max at n even, computed by a rescaled
// linear-domain kernel restricted to the sites that can reach the window.
// Entry k corresponds to y = -y_max + 2k.
std::vector<double> pinned_log_z(int n, double beta, int y_max,
                                 const RngStream& stream);

// One draw of the centred, scaled pinned free energy
//   (pi t / 2)^{-1/4} log(Z_n(0) / E Z_n(0)),   beta = (t / 2n)^{1/4}.
// Its law converges to that of g_{2t}(0): the polymer parameter t is half
// the KPZ time of the limit.
struct GSample {
  double t = 0;
  int n = 0;
  double beta = 0;
  double value = 0;
  double kpz_time() const { return 2 * t; }
};

double g_statistic(double t, int n, double log_z0);
GSample sample_g(double t, int n, const RngStream& stream);

// Replica r uses stream.child(r).
std::vector<double> sample_g_batch(double t, int n, const RngStream& stream,
                                   std::size_t replicas, unsigned threads);

// g-profile of the limit field at KPZ time 2t on the lattice-representable
// points x = 2y / sqrt(pi n), |x| <= grid_halfwidth.
// beta_override >= 0 replaces (t / 2n)^{1/4}, e.g. 0 for the free walk.
SpatialProfile spatial_profile_g(double t, int n, double grid_halfwidth,
                                 const RngStream& stream,
                                 double beta_override = -1);

// h-profile h_T(alpha, .) at KPZ time T = alpha * t_scale from a polymer of
// length n, on points x = y sqrt(T/n) / t_scale^{2/3}. Values are in the
// continuum density normalisation so they compose like SHE profiles.
SpatialProfile spatial_profile_h(double t_scale, double alpha, int n,
                                 double grid_halfwidth,
                                 const RngStream& stream);

constexpr int kOverlapMaxN = 600;

// E_{S1,S2}[L_n e^{beta sum (E(i,S1_i) + E(i,S2_i))} 1{S1_n = S2_n = 0}]
// / Z_n(0)^2 with L_n = #{1 <= i <= n : S1_i = S2_i}.
double two_replica_overlap(int n, double beta, const RngStream& stream);

}  // namespace kpzlab
