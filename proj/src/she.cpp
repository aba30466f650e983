// SPDX-License-Identifier: Apache-2.0
#include "kpzlab/she.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "kpzlab/error.hpp"
#include "kpzlab/parallel.hpp"
#include "fpenv.hpp"

namespace kpzlab {

namespace {

constexpr int kMaxHalvingDepth = 40;
constexpr std::uint64_t kHalvingChild = 0x68616c76;  // "halv"

std::int64_t snap_step(double time, double dt) {
  return static_cast<std::int64_t>(std::llround(time / dt));
}

}  // namespace

SheGrid make_she_grid(double horizon, double dx, double dt_ratio) {
  require(dt_ratio > 0 && dt_ratio <= 0.5, "dt ratio must lie in (0, 1/2]");
  SheGrid g;
  g.horizon = horizon;
  g.dx = dx;
  require(horizon > 0 && dx > 0, "horizon and dx must be positive");
  auto steps = static_cast<std::int64_t>(std::ceil(horizon / (dt_ratio * dx * dx) - 1e-9));
  g.dt = horizon / double(std::max<std::int64_t>(steps, 1));
  return g.resolved();
}

SheGrid SheGrid::resolved() const {
  SheGrid g = *this;
  if (!(g.horizon > 0) || !std::isfinite(g.horizon))
    fail(ErrorCode::domain, "SHE horizon must be positive");
  if (!(g.dx > 0) || !std::isfinite(g.dx))
    fail(ErrorCode::invalid_argument, "SHE dx must be positive");
  if (g.dt == 0) {
    auto steps = static_cast<std::int64_t>(std::ceil(g.horizon / (0.5 * g.dx * g.dx) - 1e-9));
    g.dt = g.horizon / double(std::max<std::int64_t>(steps, 1));
  }
  if (g.half_width == 0)
    g.half_width = std::ceil(6 * std::sqrt(g.horizon) / g.dx) * g.dx;
  g.validate();
  return g;
}

void SheGrid::validate() const {
  if (!(dx > 0) || !(dt > 0) || !(horizon > 0) || !(half_width > 0))
    fail(ErrorCode::invalid_argument, "SHE grid needs positive dx, dt, horizon, half_width");
  if (dt > 0.5 * dx * dx * (1 + 1e-12))
    fail(ErrorCode::invalid_argument,
         "unstable SHE grid: dt = " + std::to_string(dt) + " exceeds dx^2/2 = " +
             std::to_string(0.5 * dx * dx));
  if (boundary == Boundary::dirichlet &&
      half_width < 6 * std::sqrt(horizon) * (1 - 1e-12))
    fail(ErrorCode::invalid_argument,
         "SHE half-width " + std::to_string(half_width) +
             " is below 6 sqrt(T) = " + std::to_string(6 * std::sqrt(horizon)));
  if (half_width / dx > 5e7) fail(ErrorCode::size, "SHE grid too large");
}

int SheGrid::half_nodes() const {
  return static_cast<int>(std::llround(half_width / dx));
}

std::int64_t SheGrid::steps() const { return snap_step(horizon, dt); }

SheSolver::SheSolver(const SheGrid& grid, RngStream stream)
    : grid_(grid.resolved()),
      stream_(stream),
      halving_stream_(stream.child(kHalvingChild)) {
  std::size_t n = grid_.nodes();
  z_.assign(n + 2, 0.0);
  next_.assign(n + 2, 0.0);
  noise_.assign(n, 0.0);
  set_delta();
}

void SheSolver::set_delta() {
  std::fill(z_.begin(), z_.end(), 0.0);
  int J = grid_.half_nodes();
  z_[static_cast<std::size_t>(J) + 1] = 1.0 / grid_.dx;
  lo_ = hi_ = J;
  if (grid_.boundary == Boundary::periodic) {
    lo_ = 0;
    hi_ = 2 * J;
  }
}

void SheSolver::set_field(std::vector<double> z) {
  if (z.size() != grid_.nodes())
    fail(ErrorCode::size, "field has " + std::to_string(z.size()) +
                              " nodes, grid has " + std::to_string(grid_.nodes()));
  int first = -1, last = -1;
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (!(z[j] >= 0) || !std::isfinite(z[j]))
      fail(ErrorCode::domain, "initial field must be finite and nonnegative");
    if (z[j] > 0) {
      if (first < 0) first = int(j);
      last = int(j);
    }
  }
  if (first < 0) fail(ErrorCode::domain, "initial field is identically zero");
  std::copy(z.begin(), z.end(), z_.begin() + 1);
  lo_ = first;
  hi_ = last;
  if (grid_.boundary == Boundary::periodic) {
    lo_ = 0;
    hi_ = int(z.size()) - 1;
  }
}

std::vector<double> SheSolver::field() const {
  return std::vector<double>(z_.begin() + 1, z_.end() - 1);
}

void SheSolver::refresh_ghosts() {
  std::size_t n = grid_.nodes();
  if (grid_.boundary == Boundary::periodic) {
    z_[0] = z_[n];
    z_[n + 1] = z_[1];
  } else {
    z_[0] = 0;
    z_[n + 1] = 0;
  }
}

// One Euler-Maruyama step of size dt on the current support plus one
// node either side. Fails (leaving z_ untouched) if a value turns negative.
bool SheSolver::try_step(double dt, const std::vector<double>& dW) {
  int n = int(grid_.nodes());
  int a = std::max(lo_ - 1, 0), b = std::min(hi_ + 1, n - 1);
  refresh_ghosts();
  double r = dt / (2 * grid_.dx * grid_.dx);
  const double* z = z_.data() + 1;
  double* out = next_.data() + 1;
  const double* w = dW.data();
  bool bad = false;
  for (int j = a; j <= b; ++j) {
    double v = z[j] + r * (z[j - 1] - 2 * z[j] + z[j + 1]) + z[j] * w[j];
    out[j] = v;
    bad |= !(v >= 0);
  }
  if (bad) return false;
  std::copy(out + a, out + b + 1, z_.data() + 1 + a);
  lo_ = a;
  hi_ = b;
  return true;
}

void SheSolver::substep(std::int64_t k, std::uint64_t node, int depth,
                        double dt, const std::vector<double>& dW,
                        bool reversed) {
  if (try_step(dt, dW)) return;
  if (depth >= kMaxHalvingDepth)
    fail(ErrorCode::numeric, "SHE positivity lost after " +
                                 std::to_string(kMaxHalvingDepth) +
                                 " halvings at step " + std::to_string(k));
  ++halvings_;
  // Brownian bridge midpoint of each cell increment over this interval.
  int n = int(grid_.nodes());
  RngStream hs = halving_stream_.child(static_cast<std::uint64_t>(k));
  std::vector<double> mid(static_cast<std::size_t>(n));
  fill_row_normals(hs, node, 0, mid.size(), mid.data());
  double sd = 0.5 * std::sqrt(dt / grid_.dx);
  std::vector<double> first(dW.size()), second(dW.size());
  for (std::size_t j = 0; j < dW.size(); ++j) {
    first[j] = 0.5 * dW[j] + sd * mid[j];
    second[j] = 0.5 * dW[j] - sd * mid[j];
  }
  if (reversed) {
    substep(k, 2 * node + 1, depth + 1, dt / 2, second, reversed);
    substep(k, 2 * node, depth + 1, dt / 2, first, reversed);
  } else {
    substep(k, 2 * node, depth + 1, dt / 2, first, reversed);
    substep(k, 2 * node + 1, depth + 1, dt / 2, second, reversed);
  }
}

void SheSolver::apply_step(std::int64_t k, bool reversed) {
  int n = int(grid_.nodes());
  int a = std::max(lo_ - 1, 0), b = std::min(hi_ + 1, n - 1);
  if (grid_.noise) {
    fill_row_normals(stream_, static_cast<std::uint64_t>(k),
                     static_cast<std::uint64_t>(a), std::size_t(b - a + 1),
                     noise_.data() + a);
    double s = std::sqrt(grid_.dt / grid_.dx);
    for (int j = a; j <= b; ++j) noise_[j] *= s;
  }
  substep(k, 1, 0, grid_.dt, noise_, reversed);
}

void SheSolver::advance(std::int64_t k0, std::int64_t k1, bool reversed) {
  if (k0 < 0 || k1 < k0) fail(ErrorCode::invalid_argument, "bad step range");
  detail::DenormalGuard guard;
  if (!reversed) {
    for (std::int64_t k = k0; k < k1; ++k) apply_step(k, false);
  } else {
    for (std::int64_t k = k1; k-- > k0;) apply_step(k, true);
  }
}

SheField solve_she(const SheGrid& grid_in, const RngStream& stream,
                   const std::vector<double>& record_times) {
  SheGrid grid = grid_in.resolved();
  std::vector<double> times = record_times;
  if (times.empty()) times.push_back(grid.horizon);
  std::vector<std::int64_t> steps;
  for (double t : times) {
    if (!(t > 0) || t > grid.horizon * (1 + 1e-12))
      fail(ErrorCode::domain, "record time " + std::to_string(t) +
                                  " outside (0, horizon]");
    steps.push_back(std::max<std::int64_t>(1, snap_step(t, grid.dt)));
  }
  std::vector<std::size_t> order(times.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return steps[a] < steps[b]; });

  SheField out;
  out.grid = grid;
  out.times.resize(times.size());
  out.snapshots.resize(times.size());
  SheSolver solver(grid, stream);
  std::int64_t at = 0;
  for (std::size_t i : order) {
    solver.advance(at, steps[i]);
    at = steps[i];
    out.times[i] = double(steps[i]) * grid.dt;
    out.snapshots[i] = solver.field();
  }
  out.halvings = solver.halvings();
  return out;
}

std::size_t positive_half_support(const std::vector<double>& z) {
  std::size_t c = z.size() / 2;
  if (z.empty() || !(z[c] > 0)) fail(ErrorCode::numeric, "Z is not positive at the origin");
  std::size_t m = 0;
  while (m < c && z[c - m - 1] > 0 && z[c + m + 1] > 0) ++m;
  return m;
}

double h_scale(double H, double time, double t_scale) {
  return (H + time / 24) / std::cbrt(t_scale);
}

double g_scale(double H, double time, double t_scale) {
  return (H + 0.5 * std::log(2 * std::numbers::pi * time)) /
         std::pow(std::numbers::pi * t_scale / 4, 0.25);
}

HeightTrajectory rescale(const HeightTrajectory& raw, ScalingTag tag) {
  if (raw.tag != ScalingTag::raw)
    fail(ErrorCode::invalid_argument, "rescale expects a raw trajectory");
  HeightTrajectory out = raw;
  out.tag = tag;
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    if (tag == ScalingTag::h_scaled)
      out.values[i] = h_scale(raw.values[i], raw.times[i], raw.t_scale);
    else if (tag == ScalingTag::g_scaled)
      out.values[i] = g_scale(raw.values[i], raw.times[i], raw.t_scale);
  }
  return out;
}

HeightTrajectory sample_raw_trajectory(double t_scale,
                                       const std::vector<double>& alphas,
                                       const SheGrid& grid_in,
                                       const RngStream& stream) {
  if (!(t_scale > 0)) fail(ErrorCode::domain, "t must be positive");
  if (alphas.empty()) fail(ErrorCode::invalid_argument, "no alphas given");
  double amax = 0;
  for (double a : alphas) {
    if (!(a > 0)) fail(ErrorCode::domain, "alphas must be positive");
    amax = std::max(amax, a);
  }
  SheGrid grid = grid_in;
  if (grid.horizon < amax * t_scale * (1 - 1e-12)) {
    grid.horizon = amax * t_scale;
    grid.half_width = grid_in.half_width > 0 &&
                              grid_in.half_width >= 6 * std::sqrt(grid.horizon)
                          ? grid_in.half_width
                          : 0;
    if (grid_in.dt > 0) {
      auto steps = static_cast<std::int64_t>(std::ceil(grid.horizon / grid_in.dt - 1e-9));
      grid.dt = grid.horizon / double(steps);
    }
  }
  grid = grid.resolved();

  std::vector<double> times;
  for (double a : alphas) times.push_back(a * t_scale);
  SheField f = solve_she(grid, stream, times);
  HeightTrajectory tr;
  tr.alphas = alphas;
  tr.t_scale = t_scale;
  tr.stream = stream;
  tr.tag = ScalingTag::raw;
  std::size_t mid = static_cast<std::size_t>(grid.half_nodes());
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    double z = f.snapshots[i][mid];
    if (!(z > 0)) fail(ErrorCode::numeric, "Z(t,0) is not positive");
    tr.times.push_back(f.times[i]);
    tr.values.push_back(std::log(z));
  }
  return tr;
}

HeightTrajectory sample_h_trajectory(double t_scale,
                                     const std::vector<double>& alphas,
                                     const SheGrid& grid,
                                     const RngStream& stream) {
  return rescale(sample_raw_trajectory(t_scale, alphas, grid, stream),
                 ScalingTag::h_scaled);
}

namespace {

SheGrid grid_for(double horizon, const SheGrid& g) {
  SheGrid out = g;
  if (std::abs(out.horizon - horizon) > 1e-12 * horizon) {
    out.horizon = horizon;
    out.dt = 0;
    out.half_width = g.half_width >= 6 * std::sqrt(horizon) ? g.half_width : 0;
  }
  return out.resolved();
}

}  // namespace

SpatialProfile sample_g_field(double t, const SheGrid& grid_in,
                              const RngStream& stream) {
  if (!(t > 0)) fail(ErrorCode::domain, "t must be positive");
  SheGrid grid = grid_for(t, grid_in);
  SheField f = solve_she(grid, stream);
  double T = f.times[0];
  double sx = std::sqrt(std::numbers::pi * t / 4);
  SpatialProfile p;
  p.regime = Regime::g;
  p.t = t;
  p.alpha = 1;
  const auto& z = f.snapshots[0];
  std::size_t c = z.size() / 2, m = positive_half_support(z);
  for (std::size_t j = c - m; j <= c + m; ++j) {
    p.x.push_back(f.x(j) / sx);
    p.values.push_back(g_scale(std::log(z[j]), T, t));
  }
  return p;
}

SpatialProfile sample_h_profile(double t_scale, double alpha,
                                const SheGrid& grid_in,
                                const RngStream& stream) {
  if (!(t_scale > 0) || !(alpha > 0))
    fail(ErrorCode::domain, "t and alpha must be positive");
  double T = alpha * t_scale;
  SheGrid grid = grid_for(T, grid_in);
  SheField f = solve_she(grid, stream);
  double sx = std::pow(t_scale, 2.0 / 3.0);
  SpatialProfile p;
  p.regime = Regime::h;
  p.t = t_scale;
  p.alpha = alpha;
  const auto& z = f.snapshots[0];
  std::size_t c = z.size() / 2, m = positive_half_support(z);
  for (std::size_t j = c - m; j <= c + m; ++j) {
    p.x.push_back(f.x(j) / sx);
    p.values.push_back(h_scale(std::log(z[j]), f.times[0], t_scale));
  }
  return p;
}

std::vector<double> sample_g_she_batch(double t, const SheGrid& grid_in,
                                       const RngStream& stream,
                                       std::size_t replicas, unsigned threads) {
  SheGrid grid = grid_for(t, grid_in);
  std::vector<double> z = sample_z_origin_batch(grid, stream, replicas, threads);
  double T = double(grid.steps()) * grid.dt;
  for (double& v : z) v = g_scale(std::log(v), T, t);
  return z;
}

std::vector<double> sample_z_origin_batch(const SheGrid& grid_in,
                                          const RngStream& stream,
                                          std::size_t replicas,
                                          unsigned threads) {
  SheGrid grid = grid_in.resolved();
  std::vector<double> out(replicas);
  parallel_for(replicas, threads, [&](std::size_t r) {
    SheSolver s(grid, stream.child(r));
    s.advance(0, grid.steps());
    double z = s.at_origin();
    if (!(z > 0)) fail(ErrorCode::numeric, "Z(t,0) is not positive");
    out[r] = z;
  });
  return out;
}

}  // namespace kpzlab
