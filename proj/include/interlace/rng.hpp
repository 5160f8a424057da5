#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace interlace {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Counter-derived random stream (xoshiro256++ core). A stream is fully
/// determined by the identifiers passed to the constructor, so replicas and
/// trajectories get independent, scheduling-invariant randomness.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t st = seed;
    (void)splitmix64(st);
    st ^= 0xa0761d6478bd642full * (a + 1);
    (void)splitmix64(st);
    st ^= 0xe7037ed1a0b428dbull * (b + 1);
    (void)splitmix64(st);
    st ^= 0x8ebc6af09c88c6e3ull * (c + 1);
    for (auto& w : s_) w = splitmix64(st);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform in (0,1); never returns 0 or 1.
  double uniform() {
    return ((next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Lemire-style rejection-free enough for our n (n <= a few thousand).
    __uint128_t m = (__uint128_t)next_u64() * n;
    return (std::uint64_t)(m >> 64);
  }

  double exponential(double mean = 1.0) { return -mean * std::log(uniform()); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Exact Poisson draw by counting unit-exponential arrivals before `mean`.
  /// O(mean) work; mean stays in the hundreds in this code base.
  long poisson(double mean) {
    if (mean < 0) throw std::invalid_argument("poisson: negative mean");
    if (mean == 0) return 0;
    long k = 0;
    double acc = exponential();
    while (acc < mean) {
      ++k;
      acc += exponential();
    }
    return k;
  }

  double normal() {
    // Marsaglia polar method; consumption is variable but per-stream.
    for (;;) {
      double u = 2.0 * uniform() - 1.0;
      double v = 2.0 * uniform() - 1.0;
      double q = u * u + v * v;
      if (q > 0.0 && q < 1.0) return u * std::sqrt(-2.0 * std::log(q) / q);
    }
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4];
};

}  // namespace interlace
