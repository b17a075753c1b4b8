#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace fsar {

// 64-bit finalizer used for seed derivation (the SplitMix64 output function).
inline std::uint64_t mix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Deterministic stream splitting: stream k of a master seed.  Replication r of
// a Monte Carlo run uses derive_seed(master, r); within one replication the
// draw phases use derive_seed(rep_seed, phase).  The indices only need to be
// distinct per caller; mix64 decorrelates them.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return mix64(master + (stream + 1) * 0x9E3779B97F4A7C15ull);
}

// Seedable generator with a fixed, portable mapping from engine output to
// variates.  std::normal_distribution and std::shuffle are implementation
// defined, so results would differ across standard libraries; everything here
// is pinned down: uniforms take the top 53 bits of mt19937_64, normals come
// from Box-Muller, shuffles are Fisher-Yates with rejection-sampled indices.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; caches the second variate of each pair.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // Uniform integer in [0, n) by rejection, bias-free.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % n;
  }

  // Fisher-Yates.  Only the first `count` slots need to be final for a
  // partial shuffle, but the loop below fixes position i using draws from
  // [i, size), so stopping early is exactly a uniform sample without
  // replacement of the first `count` positions.
  template <typename T>
  void partial_shuffle(std::vector<T>& v, std::size_t count) {
    const std::size_t n = v.size();
    if (count > n) count = n;
    for (std::size_t i = 0; i < count && i + 1 < n; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(below(n - i));
      std::swap(v[i], v[j]);
    }
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    partial_shuffle(v, v.size());
  }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace fsar
