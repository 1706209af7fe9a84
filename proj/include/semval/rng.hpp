#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>

namespace semval {

// Deterministic random source. The engine is std::mt19937_64, which the
// standard pins down bit-for-bit; the distribution conversions are implemented
// here because the std:: distributions are implementation-defined and would
// break cross-toolchain reproducibility of label files and frozen test values.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1]; safe as a log() argument.
  double uniform_pos() { return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53; }

  // Uniform integer in [0, bound). Rejection keeps the result exactly uniform.
  std::uint64_t uniform_below(std::uint64_t bound) {
    // limit is the largest multiple of bound that fits in 2^64.
    const std::uint64_t limit = bound * ((~std::uint64_t{0}) / bound);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x - x % bound > limit - 1 && x >= limit);
    return x % bound;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal via Box-Muller; consumes exactly two engine draws.
  double gauss() {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Fisher-Yates shuffle of indices[0..n); std::shuffle is not used because its
  // draw sequence is implementation-defined.
  template <typename T>
  void shuffle(T* indices, std::size_t n) {
    for (std::size_t i = n; i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_below(i));
      T tmp = indices[i - 1];
      indices[i - 1] = indices[j];
      indices[j] = tmp;
    }
  }

 private:
  std::mt19937_64 engine_;
};

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = kFnvOffset;
  for (unsigned char c : s) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Derived seed for a named sub-stream. Results depend only on (base, id), never
// on scheduling, so parallel batch generation is order-independent.
inline std::uint64_t mix_seed(std::uint64_t base, std::string_view id) {
  return splitmix64(base ^ fnv1a64(id));
}

inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index) {
  return splitmix64(base ^ splitmix64(index));
}

}  // namespace semval
