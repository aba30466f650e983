// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "kpzlab/noise.hpp"
#include "kpzlab/profile.hpp"
#include "kpzlab/stats.hpp"

namespace kpzlab {

struct ComposeDetail {
  double value = 0;
  double L = 0;              // integration half-width in y
  double spacing = 0;        // quadrature spacing in y
  std::size_t nodes = 0;
  double tail_fraction = 0;  // estimated mass beyond +-L relative to the total
};

// I_t(f, g) = t^{-1/3} log int exp(t^{1/3} (f(t^{-2/3} y) + g(-t^{-2/3} y))) dy
// by log-sum-exp trapezoid on y nodes spaced t^{2/3} min(df, dg); values
// between profile nodes are linearly interpolated. L = 0 picks the
// half-width where the parabolic envelopes leave less than tail_tol of the
// mass outside (default 1e-10, so truncation stays below 1e-8), and rejects profiles that do not cover it.
ComposeDetail compose_detail(const SpatialProfile& f, const SpatialProfile& g,
                             double t, double L = 0, double tail_tol = 1e-10);
double compose(const SpatialProfile& f, const SpatialProfile& g, double t,
               double L = 0);

enum class ProfileSource { she, polymer };

struct SourceConfig {
  ProfileSource kind = ProfileSource::she;
  double dx = 0.1;           // SHE spacing in physical units
  double dt_ratio = 0.5;     // SHE dt / dx^2
  double coverage = 9.0;     // profile half-width in units of sqrt(KPZ time)
  int polymer_n = 2000;
};

// One narrow-wedge profile h_t(alpha, .) from the configured source. SHE
// profiles share the node spacing dx, so profiles from one config align.
SpatialProfile sample_profile(const SourceConfig& src, double t,
                              double alpha, const RngStream& stream);

struct CompositionChain {
  double t = 0;
  std::vector<double> alphas;   // 1 = alpha_0 < alpha_1 < ... < alpha_k
  std::vector<double> times;    // alpha_i t, snapped to the time step
  // profiles[0] is h at time t; profiles[i] is the independent
  // h_{i} := h_{t_{i-1}}((t_i - t_{i-1}) / t_{i-1}, .) of step i.
  std::vector<SpatialProfile> profiles;
  std::vector<double> outputs;  // h_t(alpha_i, 0) by iterated composition
  std::vector<double> direct;   // the same values read off the forward field
  RngStream stream;
};

// SHE source: segment i runs on stream.child(i). The forward field carries
// h_{t_{i-1}}(.), and the reversed solve of segment i from a delta at 0 is
// the independent profile of step i. The polymer source supports k = 1
// only, with the two profiles drawn on stream.child(0) and child(1).
CompositionChain sample_chain(double t, const std::vector<double>& alphas,
                              const SourceConfig& src, const RngStream& stream);

// h_t(alpha, 0) composed from independent profiles on stream.child(0), (1).
double compose_one_point(double t, double alpha, const SourceConfig& src,
                         const RngStream& stream);

struct IncrementCheck {
  double t = 0, beta = 0;
  std::vector<double> composed;  // I_t(h_t, h') - h_t(0), h' ~ h_t(beta, .)
  std::vector<double> direct;    // h_t(1 + beta, 0) - h_t(1, 0) along SHE paths
  KsResult ks;
};

// Composed versus directly simulated increments. Replica r uses
// stream.child(0).child(r) for the composed side and child(1).child(r)
// for the direct side.
IncrementCheck g_compose_check(double t, double beta, std::size_t replicas,
                               const SourceConfig& src,
                               const RngStream& stream, unsigned threads = 0);

struct FkgCell {
  double t1 = 0, t2 = 0, s1 = 0, s2 = 0;
  double p_joint = 0, p1 = 0, p2 = 0;
  double gap = 0;  // p_joint - p1 p2
  double se = 0;   // influence-function standard error of gap
  bool holds = false;  // gap >= -3 se
};

// FKG check on paired samples a_r = h_{t1}, b_r = h_{t2}.
FkgCell fkg_cell(const std::vector<double>& a, const std::vector<double>& b,
                 double s1, double s2);

struct DecouplingRow {
  double gap_ratio = 0;  // (t2 - t1) / t1
  std::vector<double> exceed;  // P(|h_{t2} - Y_2| >= x) at the given x
};

// Y_2 = (1 + beta)^{-1/3} h_{t2 | t1}(0) against the composed h_{t2}.
std::vector<DecouplingRow> decoupling_report(double t1,
                                             const std::vector<double>& gap_ratios,
                                             const std::vector<double>& xs,
                                             std::size_t replicas,
                                             const SourceConfig& src,
                                             const RngStream& stream,
                                             unsigned threads = 0);

}  // namespace kpzlab
