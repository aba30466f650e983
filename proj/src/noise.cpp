// SPDX-License-Identifier: Apache-2.0
#include "kpzlab/noise.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "kpzlab/error.hpp"

namespace kpzlab {

namespace {
constexpr std::uint64_t kSeedSalt0 = 0x6a09e667f3bcc908ULL;
constexpr std::uint64_t kSeedSalt1 = 0xbb67ae8584caa73bULL;
constexpr std::uint64_t kPathSalt = 0x3c6ef372fe94f82bULL;

// Ziggurat with 128 layers, Doornik (2005) variant: the layer index and the
// uniform come from disjoint bits of the same word.
constexpr int kZigLayers = 128;
constexpr double kZigR = 3.442619855899;
constexpr double kZigV = 9.91256303526217e-3;

struct ZigTables {
  std::array<double, kZigLayers + 1> x{};
  std::array<double, kZigLayers> ratio{};
  ZigTables() {
    double f = std::exp(-0.5 * kZigR * kZigR);
    x[0] = kZigV / f;
    x[1] = kZigR;
    x[kZigLayers] = 0;
    for (int i = 2; i < kZigLayers; ++i) {
      x[i] = std::sqrt(-2 * std::log(kZigV / x[i - 1] + f));
      f = std::exp(-0.5 * x[i] * x[i]);
    }
    for (int i = 0; i < kZigLayers; ++i) ratio[i] = x[i + 1] / x[i];
  }
};

const ZigTables& zig() {
  static const ZigTables tables;
  return tables;
}

inline double open_unit(std::uint64_t w) {
  return (static_cast<double>(static_cast<std::int64_t>(w >> 11)) + 0.5) * 0x1.0p-53;
}

// Word sources. Draw-level: word sub of draw c is s.bits(c, sub).
struct DrawWords {
  const RngStream* s;
  std::uint64_t counter;
  std::uint64_t operator()(std::uint64_t sub) const {
    return s->bits(counter, sub);
  }
};

// Row-level: word sub of entry k of a row with key h is a single SplitMix64
// step from h, which halves the hashing cost of bulk fills.
constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kGammaSub = 0xd1342543de82ef95ULL;
struct RowWords {
  std::uint64_t h;
  std::uint64_t k;
  std::uint64_t operator()(std::uint64_t sub) const {
    return mix64(h + (k + 1) * kGamma + sub * kGammaSub);
  }
};

// Finishes a ziggurat draw given its first word w = words(0).
template <class Words>
double zig_from_word(const Words& words, std::uint64_t w) {
  const ZigTables& z = zig();
  std::uint64_t sub = 1;
  for (;;) {
    double u = 2 * open_unit(w) - 1;
    unsigned i = static_cast<unsigned>(w & 0x7f);
    if (std::abs(u) < z.ratio[i]) return u * z.x[i];
    if (i == 0) {
      // tail beyond R by Marsaglia's exponential rejection
      double x, y;
      do {
        x = std::log(open_unit(words(sub++))) / kZigR;
        y = std::log(open_unit(words(sub++)));
      } while (-2 * y < x * x);
      return u < 0 ? x - kZigR : kZigR - x;
    }
    double x = u * z.x[i];
    double f0 = std::exp(-0.5 * (z.x[i] * z.x[i] - x * x));
    double f1 = std::exp(-0.5 * (z.x[i + 1] * z.x[i + 1] - x * x));
    if (f1 + open_unit(words(sub++)) * (f0 - f1) < 1.0) return x;
    w = words(sub++);
  }
}

inline double fast_or_finish(const ZigTables& z, std::uint64_t w,
                             const auto& words) {
  double u = 2 * open_unit(w) - 1;
  unsigned i = static_cast<unsigned>(w & 0x7f);
  return std::abs(u) < z.ratio[i] ? u * z.x[i] : zig_from_word(words, w);
}
}  // namespace

RngStream::RngStream(std::uint64_t root_seed, std::vector<std::uint64_t> path)
    : root_(root_seed), path_(std::move(path)) {
  std::uint64_t a = mix64(root_ ^ kSeedSalt0);
  std::uint64_t b = mix64(root_ + kSeedSalt1);
  for (std::uint64_t idx : path_) {
    std::uint64_t h = mix64(idx + kPathSalt);
    a = mix64(a ^ h);
    b = mix64(b + mix64(h ^ a));
  }
  k0_ = a;
  k1_ = b;
}

RngStream RngStream::child(std::uint64_t index) const {
  std::vector<std::uint64_t> p = path_;
  p.push_back(index);
  return RngStream(root_, std::move(p));
}

std::string RngStream::path_string() const {
  std::ostringstream os;
  os << root_;
  for (auto p : path_) os << '/' << p;
  return os.str();
}

double RngStream::normal(std::uint64_t counter) const {
  DrawWords words{this, counter};
  return zig_from_word(words, words(0));
}

void fill_normals(const RngStream& s, std::uint64_t base, std::size_t count,
                  double* out) {
  for (std::size_t i = 0; i < count; ++i) out[i] = s.normal(base + i);
}

double row_normal(const RngStream& s, std::uint64_t row, std::uint64_t k) {
  RowWords words{s.bits(row), k};
  return zig_from_word(words, words(0));
}

void fill_row_normals(const RngStream& s, std::uint64_t row,
                      std::uint64_t offset, std::size_t count, double* out) {
  const std::uint64_t h = s.bits(row);
  const ZigTables& z = zig();
  constexpr std::size_t kBlock = 512;
  std::uint64_t words[kBlock];
  unsigned char slow[kBlock];
  for (std::size_t start = 0; start < count; start += kBlock) {
    const std::size_t len = std::min(kBlock, count - start);
    const std::uint64_t base = h + (offset + start + 1) * kGamma;
    // branch-free passes so the compiler can vectorize them
    for (std::size_t k = 0; k < len; ++k)
      words[k] = mix64(base + k * kGamma);
    double* __restrict o = out + start;
    const double* __restrict zx = z.x.data();
    const double* __restrict zr = z.ratio.data();
    for (std::size_t k = 0; k < len; ++k) {
      std::uint64_t w = words[k];
      double u = 2 * open_unit(w) - 1;
      std::int64_t i = static_cast<std::int64_t>(w & 0x7f);
      o[k] = u * zx[i];
      slow[k] = std::abs(u) >= zr[i];
    }
    for (std::size_t k = 0; k < len; ++k) {
      if (slow[k]) {
        RowWords words_k{h, offset + start + k};
        o[k] = zig_from_word(words_k, words[k]);
      }
    }
  }
}

LatticeEnvironment::LatticeEnvironment(int n_steps, RngStream stream)
    : n_(n_steps), stream_(std::move(stream)) {
  require(n_steps >= 1, "environment needs n >= 1");
}

bool LatticeEnvironment::admissible(int i, int x) const noexcept {
  return i >= 1 && i <= n_ && x >= -i && x <= i && ((i - x) % 2 == 0);
}

double LatticeEnvironment::operator()(int i, int x) const {
  if (!admissible(i, x)) {
    fail(ErrorCode::domain, "environment site (" + std::to_string(i) + "," +
                                std::to_string(x) + ") is not admissible");
  }
  return row_normal(stream_, static_cast<std::uint64_t>(i),
                    static_cast<std::uint64_t>((x + i) / 2));
}

void LatticeEnvironment::row(int i, int x_lo, int count, double* out) const {
  fill_row_normals(stream_, static_cast<std::uint64_t>(i),
                   static_cast<std::uint64_t>((x_lo + i) / 2),
                   static_cast<std::size_t>(count), out);
}

std::uint64_t LatticeEnvironment::site_count() const noexcept {
  // sum_{i=1}^n (i+1)
  auto n = static_cast<std::uint64_t>(n_);
  return n * (n + 3) / 2;
}

LatticeEnvironment make_environment(int n, const RngStream& stream) {
  return LatticeEnvironment(n, stream);
}

void fill_bridge(double a, double b, double va, double vb, int M,
                 const RngStream& stream, std::uint64_t base, double* out) {
  require(a < b, "bridge needs a < b");
  require(M >= 1, "bridge needs M >= 1");
  require(std::isfinite(va) && std::isfinite(vb),
          "bridge endpoints must be finite");
  const double h = (b - a) / M;
  out[0] = va;
  double x = va;
  for (int k = 1; k < M; ++k) {
    // remaining time before and after this step
    double before = (M - k + 1) * h;
    double after = (M - k) * h;
    double mean = x + (vb - x) * h / before;
    double var = h * after / before;
    x = mean + std::sqrt(var) * stream.normal(base + k);
    out[k] = x;
  }
  out[M] = vb;
}

BridgeSample sample_bridge(double a, double b, double va, double vb, int M,
                           const RngStream& stream) {
  BridgeSample s;
  s.a = a;
  s.b = b;
  s.va = va;
  s.vb = vb;
  s.M = M;
  require(M >= 1, "bridge needs M >= 1");
  s.path.resize(static_cast<std::size_t>(M) + 1);
  fill_bridge(a, b, va, vb, M, stream, 0, s.path.data());
  return s;
}

double heat_kernel(double t, double x) {
  require(t > 0, "heat kernel needs t > 0");
  return std::exp(-x * x / (2 * t)) / std::sqrt(2 * std::numbers::pi * t);
}

}  // namespace kpzlab
