#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace sedm {

/// Seeded pseudo-random stream. Every sampler in the library takes one of
/// these by reference; there is no global generator.
///
/// Satisfies std::uniform_random_bit_generator so it can also drive the
/// standard distributions. A stream must not be shared between threads;
/// use spawn() to derive independent child streams instead.
class RandomSource {
 public:
  using result_type = std::uint64_t;

  explicit RandomSource(std::uint64_t seed = 0) : seed_(seed), engine_(mix(seed)) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  std::uint64_t seed() const { return seed_; }

  /// Child stream number `index`, independent of this stream's state.
  RandomSource spawn(std::uint64_t index) const {
    return RandomSource(mix(seed_ ^ mix(index + 0x9e3779b97f4a7c15ULL)));
  }

  /// Uniform on the open interval (0, 1).
  double uniform() {
    // 53 random bits, offset by half an ulp so 0 is never returned.
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double exponential() { return -std::log(uniform()); }

  double normal() { return normal_(engine_); }

  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
  }

 private:
  // splitmix64 finalizer; decorrelates nearby seeds.
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace sedm
