#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace qosmimo {

/// Seedable generator whose substreams are addressed by a path of integers,
/// e.g. (seed, location, channel). Two handles with the same path produce
/// identical sequences regardless of creation order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(mix(seed ^ 0x6a09e667f3bcc908ULL)), engine_(key_) {}

  /// Independent child stream keyed by this stream's key and `index`.
  Rng substream(std::uint64_t index) const { return Rng(key_, index); }
  Rng substream(std::initializer_list<std::uint64_t> path) const {
    Rng r = *this;
    for (auto p : path) r = r.substream(p);
    return r;
  }

  std::uint64_t key() const noexcept { return key_; }
  std::mt19937_64& engine() noexcept { return engine_; }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double normal() { return normal_(engine_); }
  /// CN(0, 1): real and imaginary parts each N(0, 1/2).
  std::complex<double> complex_normal() {
    constexpr double kHalf = 0.70710678118654752440;
    const double re = normal_(engine_);
    const double im = normal_(engine_);
    return {kHalf * re, kHalf * im};
  }

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  Rng(std::uint64_t parent, std::uint64_t index)
      : key_(mix(parent ^ mix(index + 0x3c6ef372fe94f82bULL))), engine_(key_) {}

  std::uint64_t key_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace qosmimo
