// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace kpzlab {

struct IntegerPartition {
  int k = 0;
  std::vector<int> parts;         // weakly decreasing
  std::vector<int> multiplicity;  // multiplicity[j] = m_j, size k + 1

  std::size_t length() const { return parts.size(); }
  //! Throws unless parts and multiplicities describe the same partition of k.
  void validate() const;
};

// All partitions of k (1 <= k <= 30), each once, in reverse lexicographic
// order starting from (k).
std::vector<IntegerPartition> enumerate_partitions(int k);

enum class MomentMethod { quadrature, bound };

// Moments of Z(2t, 0) e^{t/12} for delta initial data: value estimates
// E[Z(2t,0)^k e^{kt/12}].
struct MomentResult {
  int k = 0;
  double t = 0;
  double value = 0;
  MomentMethod method = MomentMethod::quadrature;
  double est_error = 0;      // absolute
  std::size_t evaluations = 0;
  int max_nodes = 0;         // finest per-axis rule used by any term
};

struct QuadSpec {
  int initial_nodes = 16;
  int max_nodes = 1024;
  double rel_tol = 1e-3;
  double budget = 3e9;  // node tuples summed over all refinements
};

// Kardar's replica formula: a sum over partitions of Gaussian-weighted
// integrals, each done by tensor Gauss-Hermite quadrature over multisets of
// nodes (the integrand is symmetric within equal parts). Terms are refined
// by node doubling, largest error first, until the summed doubling error
// is below rel_tol * value. Throws a convergence error otherwise.
MomentResult kardar_moment(int k, double t, const QuadSpec& spec = {});

// Bounding every ratio factor by 1, lambda_i^{3/2} by 1 and sum lambda^3
// by k^3: sum over partitions of k! e^{t k^3/12} / ((4 pi t)^{l/2} prod m_j!).
// Returns +inf when the value overflows; log_kardar_bound stays finite.
double kardar_bound(int k, double t);
double log_kardar_bound(int k, double t);

// Exact upper bound on E[(Z(2t,0) sqrt(4 pi t))^k] from the first
// inequality chain (ratio factors bounded by 1 only):
// e^{(t k^3 - t k)/12} sum (4 pi t)^{(k - l)/2} k! / prod m_j!.
double log_exponential_moment_bound(int k, double t);

struct ShortTimeBoundConfig {
  double C = 1.0;  // the unspecified constant, calibrated once and frozen
  double t0 = 1.0 / (4.0 * 3.141592653589793);
  double s0 = 1.0;
};

struct ShortTimeBound {
  double t = 0, s = 0, eps = 0;
  long k = 0;             // floor(s (pi t/4)^{-1/4})
  double markov = 0;      // exp(C(s^3 t^{1/4-4eps} + s^2) - k s (pi t/2)^{1/4})
  double simplified = 0;  // exp(-s^2 f / 12), f = 1/(C + sqrt(C^2 + 3 C s t^{1/4-4eps}))
  double certified = 0;   // min over k of exact moment bound times e^{-k sigma s}
  long certified_k = 0;
};

// Upper bounds on P(g_t >= s). `certified` needs no constant: it is Markov's
// inequality with the explicit moment bound, at KPZ time t.
ShortTimeBound short_time_uppertail_bound(double t, double s, double eps,
                                          const ShortTimeBoundConfig& cfg = {});

}  // namespace kpzlab
