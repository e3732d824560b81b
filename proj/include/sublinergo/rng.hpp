// Counter-based random numbers (Philox4x32-10). Every draw is a pure
// function of (seed, stream, counter), so ensembles do not depend on the
// order in which paths are simulated.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace sublinergo::rng {

namespace detail {

inline constexpr std::uint32_t kMulA = 0xD2511F53u;
inline constexpr std::uint32_t kMulB = 0xCD9E8D57u;
inline constexpr std::uint32_t kWeylA = 0x9E3779B9u;
inline constexpr std::uint32_t kWeylB = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  lo = static_cast<std::uint32_t>(p);
  hi = static_cast<std::uint32_t>(p >> 32);
}

}  // namespace detail

using Block = std::array<std::uint32_t, 4>;

inline Block philox4x32(Block ctr, std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t lo0, hi0, lo1, hi1;
    detail::mulhilo(detail::kMulA, ctr[0], lo0, hi0);
    detail::mulhilo(detail::kMulB, ctr[2], lo1, hi1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += detail::kWeylA;
    key[1] += detail::kWeylB;
  }
  return ctr;
}

/// Uniform doubles in (0, 1) from 64 random bits.
inline double to_unit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

/// Keyed stream: draw(stream, counter) is deterministic.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  Block block(std::uint64_t stream, std::uint64_t counter) const {
    return philox4x32({static_cast<std::uint32_t>(counter), static_cast<std::uint32_t>(counter >> 32),
                       static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)},
                      key_);
  }

  /// Two uniforms in (0,1).
  std::array<double, 2> uniform2(std::uint64_t stream, std::uint64_t counter) const {
    const Block b = block(stream, counter);
    return {to_unit((static_cast<std::uint64_t>(b[0]) << 32) | b[1]),
            to_unit((static_cast<std::uint64_t>(b[2]) << 32) | b[3])};
  }

  double uniform(std::uint64_t stream, std::uint64_t counter) const { return uniform2(stream, counter)[0]; }

  /// Two independent standard normals (Box-Muller).
  std::array<double, 2> normal2(std::uint64_t stream, std::uint64_t counter) const {
    const auto u = uniform2(stream, counter);
    const double r = std::sqrt(-2.0 * std::log(u[0]));
    const double a = 2.0 * std::numbers::pi * u[1];
    return {r * std::cos(a), r * std::sin(a)};
  }

  double normal(std::uint64_t stream, std::uint64_t counter) const { return normal2(stream, counter)[0]; }

 private:
  std::array<std::uint32_t, 2> key_;
};

}  // namespace sublinergo::rng
