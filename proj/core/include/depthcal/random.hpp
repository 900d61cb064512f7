#pragma once

#include <cmath>
#include <cstdint>

namespace depthcal {

/// pcg32: the PCG-XSH-RR 64/32 generator with the reference increment
/// (O'Neill 2014). All scene randomness flows through one instance in a
/// fixed draw order, so a seed pins the generated scene bit for bit on a
/// given platform. Gaussian draws use Box-Muller on top of 53-bit uniforms
/// instead of std::normal_distribution, whose output is
/// implementation-defined.
class Pcg32 {
 public:
  explicit Pcg32(std::uint64_t seed) : state_(0), inc_((kDefaultStream << 1u) | 1u) {
    next_u32();
    state_ += seed;
    next_u32();
  }

  std::uint32_t next_u32() {
    const std::uint64_t old = state_;
    state_ = old * 6364136223846793005ull + inc_;
    const auto xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
    const auto rot = static_cast<std::uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() {
    const auto hi = static_cast<std::uint64_t>(next_u32() >> 5);   // 27 bits
    const auto lo = static_cast<std::uint64_t>(next_u32() >> 6);   // 26 bits
    return static_cast<double>((hi << 26) | lo) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal draw. Consumes exactly two uniforms; the sine branch is
  /// discarded so the draw count stays predictable.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) {
      u1 = uniform();
    }
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

 private:
  static constexpr std::uint64_t kDefaultStream = 0xda3e39cb94b95bdbull;
  static constexpr double kPi = 3.14159265358979323846;

  std::uint64_t state_;
  std::uint64_t inc_;
};

}  // namespace depthcal
