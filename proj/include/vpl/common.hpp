#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

namespace vpl {

template <typename Scalar>
inline constexpr Scalar pi_v = std::numbers::pi_v<Scalar>;

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;

using Vec2d = Vec2<double>;

/// Deterministic 64-bit generator (splitmix64).  Used for seeded
/// perturbations and randomized checks; never seeded from the clock.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [a, b).
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

 private:
  std::uint64_t state_;
};

}  // namespace vpl
