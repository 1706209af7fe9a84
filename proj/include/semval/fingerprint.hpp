#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <string>

#include "semval/rng.hpp"

namespace semval {

inline std::uint64_t fnv1a64_bytes(std::uint64_t h, const void* data, std::size_t len) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

// Stable content hash over a tag plus IEEE bit patterns of the doubles.
inline std::string fingerprint_doubles(std::string_view tag, std::span<const double> values) {
  std::uint64_t h = fnv1a64(tag);
  for (double v : values) {
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    h = fnv1a64_bytes(h, &bits, sizeof(bits));
  }
  return hex64(h);
}

}  // namespace semval
