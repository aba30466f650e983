// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace kpzlab {

//! SplitMix64 finalizer (Stafford variant 13).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class CounterEngine;

// Counter-based random stream. The key is a hash of (root_seed, path);
// draw number c of the stream is a keyed bijective hash of c, so any draw
// can be produced in O(1) without state.
class RngStream {
 public:
  explicit RngStream(std::uint64_t root_seed = 0,
                     std::vector<std::uint64_t> path = {});

  RngStream child(std::uint64_t index) const;

  std::uint64_t root_seed() const noexcept { return root_; }
  const std::vector<std::uint64_t>& path() const noexcept { return path_; }
  std::string path_string() const;

  std::uint64_t bits(std::uint64_t counter) const noexcept {
    std::uint64_t z = mix64((counter * 0x9e3779b97f4a7c15ULL) ^ k0_);
    return mix64(z + k1_);
  }
  // Secondary draws attached to one counter (used by rejection samplers
  // that may consume a variable number of words).
  std::uint64_t bits(std::uint64_t counter, std::uint64_t sub) const noexcept {
    if (sub == 0) return bits(counter);
    std::uint64_t z = mix64((counter * 0x9e3779b97f4a7c15ULL) ^ k0_);
    return mix64(z + k1_ + mix64(sub * 0xd1b54a32d192ed03ULL));
  }
  //! Uniform on the open interval (0, 1).
  double uniform(std::uint64_t counter) const noexcept {
    return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
  }
  //! Standard normal keyed by counter.
  double normal(std::uint64_t counter) const;

  CounterEngine engine(std::uint64_t counter) const;

  bool operator==(const RngStream& o) const {
    return root_ == o.root_ && path_ == o.path_;
  }

 private:
  std::uint64_t root_;
  std::vector<std::uint64_t> path_;
  std::uint64_t k0_ = 0;
  std::uint64_t k1_ = 0;
};

// UniformRandomBitGenerator view of one counter of a stream.
class CounterEngine {
 public:
  using result_type = std::uint64_t;
  CounterEngine(const RngStream* s, std::uint64_t counter)
      : s_(s), counter_(counter) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() { return s_->bits(counter_, sub_++); }

 private:
  const RngStream* s_;
  std::uint64_t counter_;
  std::uint64_t sub_ = 0;
};

inline CounterEngine RngStream::engine(std::uint64_t counter) const {
  return CounterEngine(this, counter);
}

// Fills out[0..count) with standard normals keyed by base+i.
void fill_normals(const RngStream& s, std::uint64_t base, std::size_t count,
                  double* out);

// Row-keyed normals: entry k of row `row`. Bulk fills of a row cost one
// hash per entry; single entries can still be drawn in O(1).
double row_normal(const RngStream& s, std::uint64_t row, std::uint64_t k);
void fill_row_normals(const RngStream& s, std::uint64_t row,
                      std::uint64_t offset, std::size_t count, double* out);

// Disorder field E(i, x) for 1 <= i <= n, |x| <= i, x = i (mod 2).
// Values are generated on demand from the stream.
class LatticeEnvironment {
 public:
  LatticeEnvironment(int n_steps, RngStream stream);

  int n_steps() const noexcept { return n_; }
  const RngStream& stream() const noexcept { return stream_; }
  bool admissible(int i, int x) const noexcept;
  double operator()(int i, int x) const;
  //! Values at x = x_lo, x_lo + 2, ..., x_lo + 2*(count-1) on row i.
  void row(int i, int x_lo, int count, double* out) const;
  std::uint64_t site_count() const noexcept;

 private:
  int n_;
  RngStream stream_;
};

LatticeEnvironment make_environment(int n, const RngStream& stream);

struct BridgeSample {
  double a = 0, b = 1;
  double va = 0, vb = 0;
  int M = 1;
  std::vector<double> path;  // M+1 values on the uniform grid

  double grid(int k) const { return a + (b - a) * k / M; }
};

// Standard (unit diffusion) Brownian bridge from (a, va) to (b, vb) on a
// uniform grid of M intervals, by sequential Gaussian conditioning.
BridgeSample sample_bridge(double a, double b, double va, double vb, int M,
                           const RngStream& stream);

// Same construction written into out[0..M]; normals keyed from `base`.
void fill_bridge(double a, double b, double va, double vb, int M,
                 const RngStream& stream, std::uint64_t base, double* out);

double heat_kernel(double t, double x);

}  // namespace kpzlab
