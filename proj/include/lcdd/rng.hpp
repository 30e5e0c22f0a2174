#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace lcdd {

/// Seeded random stream with fixed output transforms. mt19937_64 is fully
/// specified by the standard and std::*_distribution is not, so uniform and
/// normal draws are derived here directly: uniform takes the top 53 bits,
/// normal is Box-Muller with two fresh uniforms per sample (no caching).
/// Identical seeds give identical streams on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform on [0, 1).
  double uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  /// Normal with zero mean and the given standard deviation.
  double normal(double stddev) {
    double u1 = 1.0 - uniform01();  // (0, 1], keeps the log finite
    double u2 = uniform01();
    constexpr double two_pi = 6.283185307179586476925286766559;
    return stddev * std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace lcdd
