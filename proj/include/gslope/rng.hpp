#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace gslope {

// Counter-based generator (Philox2x64, 10 rounds). Streams keyed by (seed,
// stream) are independent, so replication r of a simulation can draw from
// stream r and results do not depend on scheduling order.
class Philox {
 public:
  Philox(std::uint64_t seed, std::uint64_t stream)
      : key_(seed), stream_(stream) {}

  std::uint64_t next_u64() {
    if (buf_pos_ > 1) {
      block(counter_++, out_);
      buf_pos_ = 0;
    }
    return out_[buf_pos_++];
  }

  // Uniform on [0, 1), 53-bit mantissa.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; caches the sine partner.
  double next_normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = next_double();
    double u2 = next_double();
    double r = std::sqrt(-2.0 * std::log1p(-u1));  // 1-u1 in (0,1]
    double a = 6.283185307179586476925287 * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

  // Uniform integer in {0, ..., n-1}, rejection sampled (unbiased).
  std::uint64_t next_below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("next_below: n must be positive");
    std::uint64_t bound = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= bound);
    return x % n;
  }

  int next_binomial(int trials, double prob) {
    int c = 0;
    for (int t = 0; t < trials; ++t) c += next_double() < prob;
    return c;
  }

 private:
  void block(std::uint64_t ctr, std::uint64_t out[2]) const {
    constexpr std::uint64_t M = 0xD2B74407B1CE6E93ULL;
    constexpr std::uint64_t W = 0x9E3779B97F4A7C15ULL;
    std::uint64_t x0 = ctr, x1 = stream_, k = key_;
    for (int round = 0; round < 10; ++round) {
      auto prod = static_cast<unsigned __int128>(M) * x0;
      std::uint64_t lo = static_cast<std::uint64_t>(prod);
      std::uint64_t hi = static_cast<std::uint64_t>(prod >> 64);
      x0 = hi ^ k ^ x1;
      x1 = lo;
      k += W;
    }
    out[0] = x0;
    out[1] = x1;
  }

  std::uint64_t key_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::uint64_t out_[2] = {0, 0};
  int buf_pos_ = 2;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace gslope
