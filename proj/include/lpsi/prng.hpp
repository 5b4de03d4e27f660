#pragma once

#include <cmath>
#include <cstdint>

namespace lpsi {

/// splitmix64 generator with explicit output mappings. The standard library
/// distributions are implementation-defined, which would break the
/// byte-identical-output contract, so the mappings live here.
struct Rng {
  std::uint64_t state;

  explicit Rng(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  std::uint64_t below(std::uint64_t n) { return next() % n; }

  /// Box-Muller; two uniforms per call, no cached spare.
  double gaussian() {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  /// Independent stream derived from a base seed.
  static Rng derive(std::uint64_t seed, std::uint64_t stream) {
    Rng r(seed ^ (0x9e3779b97f4a7c15ull * (stream + 1)));
    r.next();
    return r;
  }
};

}  // namespace lpsi
