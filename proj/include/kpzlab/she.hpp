// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "kpzlab/noise.hpp"
#include "kpzlab/profile.hpp"

namespace kpzlab {

enum class Boundary { dirichlet, periodic };

// Explicit finite-difference grid for dZ = (1/2) Z_xx dt + Z dW on
// [-L, L] with nodes j*dx, |j| <= J.
struct SheGrid {
  double dx = 0.05;
  double dt = 0;  // 0: choose the largest T/steps <= dx^2 / 2
  double half_width = 0;  // 0: 6 sqrt(T) rounded up to the grid
  double horizon = 1;
  Boundary boundary = Boundary::dirichlet;
  bool noise = true;

  //! Fills the automatic fields and checks stability and truncation.
  SheGrid resolved() const;
  void validate() const;
  int half_nodes() const;  // J
  std::int64_t steps() const;
  std::size_t nodes() const { return 2 * static_cast<std::size_t>(half_nodes()) + 1; }
};

SheGrid make_she_grid(double horizon, double dx, double dt_ratio = 0.5);

// Steps the discretised SHE. Step k uses the normals of row k of the
// stream, so solves over the same stream share one noise realisation.
class SheSolver {
 public:
  SheSolver(const SheGrid& grid, RngStream stream);

  const SheGrid& grid() const { return grid_; }
  void set_delta();  // 1/dx at node 0
  void set_field(std::vector<double> z);
  std::vector<double> field() const;
  double at_origin() const { return z_[static_cast<std::size_t>(grid_.half_nodes()) + 1]; }

  // Applies steps k0, ..., k1-1 (or k1-1, ..., k0 when reversed). Each
  // step matrix is symmetric, so the reversed product is the transpose of
  // the forward one.
  void advance(std::int64_t k0, std::int64_t k1, bool reversed = false);

  std::int64_t halvings() const { return halvings_; }

 private:
  bool try_step(double dt, const std::vector<double>& dW);
  void substep(std::int64_t k, std::uint64_t node, int depth, double dt,
               const std::vector<double>& dW, bool reversed);
  void apply_step(std::int64_t k, bool reversed);
  void refresh_ghosts();

  SheGrid grid_;
  RngStream stream_;
  RngStream halving_stream_;
  std::vector<double> z_;  // padded: z_[0] and z_[N+1] are ghost nodes
  std::vector<double> next_;
  std::vector<double> noise_;
  int lo_ = 0, hi_ = 0;  // active index range (nonzero support)
  std::int64_t halvings_ = 0;
};

struct SheField {
  SheGrid grid;
  std::vector<double> times;
  std::vector<std::vector<double>> snapshots;  // Z at each recorded time
  std::int64_t halvings = 0;
  double x(std::size_t j) const {
    return (double(j) - grid.half_nodes()) * grid.dx;
  }
};

// Full solve from delta data. Recorded times snap to the nearest step;
// an empty list records the horizon only.
SheField solve_she(const SheGrid& grid, const RngStream& stream,
                   const std::vector<double>& record_times = {});

// Largest m such that z[c + j] > 0 for |j| <= m, c the centre node. Nodes
// the stencil has not reached yet hold exact zeros.
std::size_t positive_half_support(const std::vector<double>& z);

enum class ScalingTag { raw, h_scaled, g_scaled };

struct HeightTrajectory {
  std::vector<double> times;   // physical times alpha * t_scale
  std::vector<double> alphas;
  std::vector<double> values;  // according to tag
  double t_scale = 1;
  ScalingTag tag = ScalingTag::raw;
  RngStream stream;
};

// h_t(alpha, 0) = (H(alpha t, 0) + alpha t / 24) / t^{1/3}
double h_scale(double H, double time, double t_scale);
// g_t(alpha, 0) = (H(alpha t, 0) + log sqrt(2 pi alpha t)) / (pi t / 4)^{1/4}
double g_scale(double H, double time, double t_scale);

HeightTrajectory rescale(const HeightTrajectory& raw, ScalingTag tag);

// Raw H(alpha_i t, 0) along one noise realisation.
HeightTrajectory sample_raw_trajectory(double t_scale,
                                       const std::vector<double>& alphas,
                                       const SheGrid& grid,
                                       const RngStream& stream);

// The same trajectory in the 1:2:3 scaling.
HeightTrajectory sample_h_trajectory(double t_scale,
                                     const std::vector<double>& alphas,
                                     const SheGrid& grid,
                                     const RngStream& stream);

// g_t(x) on the grid points x = X / (pi t / 4)^{1/2}.
SpatialProfile sample_g_field(double t, const SheGrid& grid,
                              const RngStream& stream);

// h_{t_scale}(alpha, x) with x = X / t_scale^{2/3}, at time alpha*t_scale.
SpatialProfile sample_h_profile(double t_scale, double alpha,
                                const SheGrid& grid, const RngStream& stream);

// g_t(0) for replicas r = 0..R-1 on stream.child(r).
std::vector<double> sample_g_she_batch(double t, const SheGrid& grid,
                                       const RngStream& stream,
                                       std::size_t replicas, unsigned threads);

// Raw Z(t, 0) for replicas r = 0..R-1 on stream.child(r).
std::vector<double> sample_z_origin_batch(const SheGrid& grid,
                                          const RngStream& stream,
                                          std::size_t replicas,
                                          unsigned threads);

}  // namespace kpzlab
