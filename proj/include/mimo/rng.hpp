// SPDX-License-Identifier: Apache-2.0
//
// Counter-based random streams for reproducible parallel Monte Carlo.
// The generator is Philox4x32-10. Each logical stream (one simulation
// trial, one channel draw) owns a disjoint counter block, so the numbers
// it produces depend only on (master seed, stream id, draw index) and
// never on thread count or execution order.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>

namespace mimo {

namespace detail {
inline constexpr std::uint32_t kPhiloxMul0 = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxMul1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kPhiloxWeyl0 = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxWeyl1 = 0xBB67AE85u;
}  // namespace detail

// One Philox4x32-10 block: 128-bit counter and 64-bit key in, four 32-bit
// words out. Pure function; matches the published known-answer vectors.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::uint64_t key) {
  std::uint32_t k0 = static_cast<std::uint32_t>(key);
  std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
  for (int round = 0; round < 10; ++round) {
    if (round != 0) {
      k0 += detail::kPhiloxWeyl0;
      k1 += detail::kPhiloxWeyl1;
    }
    const std::uint64_t p0 = std::uint64_t{detail::kPhiloxMul0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{detail::kPhiloxMul1} * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ k0,
           static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ k1,
           static_cast<std::uint32_t>(p0)};
  }
  return ctr;
}

// A single random stream. The master seed becomes the Philox key, the
// stream id occupies the upper counter words, and the lower 64 counter
// bits index successive blocks within the stream.
class CounterRng {
 public:
  CounterRng(std::uint64_t master_seed, std::uint64_t stream)
      : key_(master_seed),
        ctr_{0u, 0u, static_cast<std::uint32_t>(stream),
             static_cast<std::uint32_t>(stream >> 32)} {}

  std::uint32_t next_u32() {
    if (pos_ == 4) refill();
    return buf_[pos_++];
  }

  std::uint64_t next_u64() {
    const std::uint64_t lo = next_u32();
    const std::uint64_t hi = next_u32();
    return lo | (hi << 32);
  }

  // Uniform on [0, 1) with 53-bit resolution.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; generates pairs and caches the second.
  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] keeps the log finite.
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

  // Circularly-symmetric complex normal, unit variance (1/2 per component).
  std::complex<double> next_cgaussian() {
    const double re = next_gaussian();
    const double im = next_gaussian();
    return {re * 0.70710678118654752440, im * 0.70710678118654752440};
  }

 private:
  void refill() {
    buf_ = philox4x32(ctr_, key_);
    if (++ctr_[0] == 0) ++ctr_[1];
    pos_ = 0;
  }

  std::uint64_t key_;
  std::array<std::uint32_t, 4> ctr_;
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 4;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace mimo
