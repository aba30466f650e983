// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "kpzlab/noise.hpp"

namespace kpzlab {

enum class HamiltonianKind { long_time, short_time, custom };

// H(x) = exp(rate * x) with rate t^{1/3} (long) or (pi t / 4)^{1/4}
// (short). A custom H is accepted by the rejection sampler only.
struct Hamiltonian {
  HamiltonianKind kind = HamiltonianKind::long_time;
  double t = 1;
  std::function<double(double)> fn;  // custom only

  double rate() const;
  // H(-inf) = 0 and H(+inf) = +inf exactly.
  double operator()(double x) const;
};

Hamiltonian make_hamiltonian(HamiltonianKind kind, double t);
Hamiltonian custom_hamiltonian(std::function<double(double)> fn);

// Convex, positive, increasing on the given points.
bool hamiltonian_is_admissible(const Hamiltonian& H,
                               const std::vector<double>& xs);

// Curves k1..k2 on [a, b] with M cells. Curve 0 is the top one. `upper`
// and `lower` hold f and g on the M+1 grid points; +inf / -inf entries are
// the "no boundary" sentinels. An empty vector means the sentinel
// everywhere.
struct EnsembleSegment {
  int k1 = 1;
  double a = 0, b = 1;
  int M = 32;
  std::vector<double> entrance;  // x_i per curve
  std::vector<double> exit;      // y_i per curve
  std::vector<double> upper;
  std::vector<double> lower;
  std::vector<std::vector<double>> paths;  // filled by the samplers

  int curves() const { return static_cast<int>(entrance.size()); }
  int k2() const { return k1 + curves() - 1; }
  double spacing() const { return (b - a) / M; }
  double grid(int j) const { return a + (b - a) * j / M; }
  double upper_at(int j) const;
  double lower_at(int j) const;

  // Shape checks. With paths set, also the endpoint match.
  void validate(bool need_paths = false) const;
};

// log W = -sum_i int H(L_i - L_{i-1}) dx by the trapezoid rule, with
// L_{k1-1} = f and L_{k2+1} = g. -inf when some term is infinite.
double log_gibbs_weight(const EnsembleSegment& seg, const Hamiltonian& H);
double gibbs_weight(const EnsembleSegment& seg, const Hamiltonian& H);

struct ResampleResult {
  EnsembleSegment segment;
  std::size_t attempts = 0;
  double mean_weight = 0;  // average W over the proposals drawn
};

// Exact rejection: free bridges accepted with probability W. Attempt r
// draws from stream.child(r). Throws ErrorCode::convergence after
// max_attempts, reporting the mean weight seen.
ResampleResult resample_segment(const EnsembleSegment& spec,
                                const Hamiltonian& H, const RngStream& stream,
                                std::size_t max_attempts = 1000000);

struct MonotonePair {
  EnsembleSegment upper;  // from spec1
  EnsembleSegment lower;  // from spec2
  int sweeps = 0;
  // Split R-hat of the top-curve midpoint over the second half of the
  // sweeps, the larger of the two chains.
  double rhat = 0;
  std::size_t guarded = 0;  // round-off ties forced back into order
};

// Heat-bath Gibbs sweeps on the grid measure, both chains driven by the
// same uniform at every site update through a numeric inverse CDF on a
// shared x-grid, which keeps seg1 >= seg2 at every point. Needs
// spec2 <= spec1 in entrance, exit, upper and lower data.
MonotonePair monotone_resample_pair(const EnsembleSegment& spec1,
                                    const EnsembleSegment& spec2,
                                    const Hamiltonian& H,
                                    const RngStream& stream,
                                    int sweeps = 10000);

// Canned checks shared by the CLI and the acceptance run. Replicas are
// spread over threads; replica r uses stream.child(r).
struct EnsembleCheck {
  std::string name;
  std::size_t replicas = 0;
  double statistic = 0;
  double p_value = 1;
  std::size_t failures = 0;  // ordering violations for the coupling check
  bool pass = false;
};

// Boundary-free rejection on [0, 2] from 0.4 to -0.6: midpoint against
// N(-0.1, 1/2), KS at 1%.
EnsembleCheck free_bridge_check(std::size_t replicas, const RngStream& stream,
                                unsigned threads = 0);

// Two-curve segments with ordered entrance, exit and boundary data; counts
// replicas with any pointwise ordering violation.
EnsembleCheck monotone_order_check(HamiltonianKind kind, double t,
                                   std::size_t replicas, int sweeps,
                                   const RngStream& stream,
                                   unsigned threads = 0);

// Top curve of polymer g profiles (parameter t, length n) resampled as a
// free bridge on windows of 4 profile cells; midpoint-minus-chord of the
// original against the resampled values, two-sample KS at 1%.
EnsembleCheck gibbs_fixed_point_check(double t, int n, std::size_t profiles,
                                      const RngStream& stream,
                                      unsigned threads = 0);

}  // namespace kpzlab
