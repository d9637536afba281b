#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

#include "softnet/types.hpp"

namespace softnet {

/// Deterministic RNG with platform-independent distributions.
/// std::mt19937_64 provides the bit stream; the uniform and gaussian
/// transforms below are spelled out so outputs never depend on the
/// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; one spare value is cached.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  Vector gaussian_vector(int dim, double stddev = 1.0) {
    Vector v(dim);
    for (int i = 0; i < dim; ++i) v[i] = stddev * gaussian();
    return v;
  }

  /// Uniform draw from the unit ball: gaussian direction, radius u^(1/d).
  Vector unit_ball(int dim) {
    Vector v = gaussian_vector(dim);
    const double norm = v.norm();
    if (norm == 0.0) return Vector::Zero(dim);
    const double radius = std::pow(uniform(), 1.0 / dim);
    return v * (radius / norm);
  }

  double sign() { return (engine_() & 1u) ? 1.0 : -1.0; }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}
}  // namespace detail

/// Counter-based seed split: each (label, index) pair yields an
/// independent stream seed, so experiment components can be reproduced
/// in isolation from one master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                                 std::uint64_t index = 0) {
  return detail::splitmix64(master ^ detail::fnv1a(label) ^
                            (0x9e3779b97f4a7c15ull * (index + 1)));
}

}  // namespace softnet
