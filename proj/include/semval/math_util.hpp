#pragma once

#include <cmath>
#include <cstddef>
#include <span>

#include "semval/errors.hpp"

namespace semval {

// log C(n, k) via lgamma; valid for any 0 <= k <= n.
inline double log_binom(int n, int k) {
  if (k < 0 || k > n) throw InvalidArgument("log_binom: k out of range");
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// C(n, k). Exact 128-bit integer arithmetic up to n = 64 (largest value there
// is ~1.8e18, far inside the 128-bit range); log-space beyond that guard.
inline double binom(int n, int k) {
  if (k < 0 || k > n) throw InvalidArgument("binom: k out of range");
  if (n > 64) return std::exp(log_binom(n, k));
  if (k > n - k) k = n - k;
  unsigned __int128 r = 1;
  for (int i = 1; i <= k; ++i) {
    r = r * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
  }
  return static_cast<double>(r);
}

// Order-insensitive reduction: the result depends only on element values and
// positions, never on which thread produced them, so aggregations stay
// bit-identical across worker counts.
inline double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 8) {
    double acc = 0.0;
    for (double v : x) acc += v;
    return acc;
  }
  const std::size_t half = x.size() / 2;
  return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

inline double mean(std::span<const double> x) {
  if (x.empty()) throw InvalidArgument("mean of empty range");
  return pairwise_sum(x) / static_cast<double>(x.size());
}

// Population variance (divide by N).
inline double variance_population(std::span<const double> x) {
  const double m = mean(x);
  double acc = 0.0;
  for (double v : x) acc += (v - m) * (v - m);
  return acc / static_cast<double>(x.size());
}

// Unbiased sample variance (divide by N-1).
inline double variance_sample(std::span<const double> x) {
  if (x.size() < 2) throw InvalidArgument("sample variance needs at least two values");
  const double m = mean(x);
  double acc = 0.0;
  for (double v : x) acc += (v - m) * (v - m);
  return acc / static_cast<double>(x.size() - 1);
}

}  // namespace semval
