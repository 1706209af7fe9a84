#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace semval {

// One noisy (or exact) label: the estimate plus everything needed to reproduce
// it bit-identically and to account for its cost. Missing coordinates (e.g. an
// empty sampling stratum) are NaN with `partial` set; every non-missing entry
// must be finite unless `failed` is set.
struct NoisyLabelRecord {
  std::string context_id;
  std::string method;
  std::uint64_t num_samples = 0;
  std::uint64_t seed = 0;
  std::vector<double> label;
  std::uint64_t evals_used = 0;
  bool partial = false;
  bool biased = false;
  bool failed = false;
  std::string error;

  static bool is_missing(double v) { return std::isnan(v); }
};

}  // namespace semval
