#pragma once

// Agreement metrics between estimated and exact per-context vectors, plus
// ranking metrics for mislabeled-point identification. Estimates may carry
// missing coordinates (NaN); those pairs are skipped and counted. Metrics
// whose value is undefined on the given data (constant series, empty class)
// are reported as absent rather than NaN.

#include <cstdint>
#include <optional>
#include <vector>

#include "semval/record.hpp"

namespace semval {

enum class CorrelationMode {
  kPerExample,  // correlation within each example's vector, averaged
  kGlobal,      // one correlation over all flattened pairs
};

struct MetricReport {
  double mse = 0.0;
  // mse divided by the population variance of the ground truth; predicting
  // the global truth mean everywhere scores exactly 1.
  std::optional<double> mse_normalized;
  std::optional<double> pearson;
  std::optional<double> spearman;
  double sign_agreement = 0.0;  // zero counts as positive sign
  std::optional<double> auroc;
  std::optional<double> aupr;
  std::optional<double> negative_fraction;
  std::uint64_t evals_total = 0;
  int num_examples = 0;
  int label_dim = 0;
  int num_missing = 0;  // estimate coordinates skipped as missing
};

MetricReport compare(const std::vector<std::vector<double>>& estimates,
                     const std::vector<std::vector<double>>& ground_truth, CorrelationMode mode,
                     std::uint64_t evals_total = 0);

// Skips failed records and accumulates their eval counts into evals_total.
MetricReport compare(const std::vector<NoisyLabelRecord>& estimates,
                     const std::vector<std::vector<double>>& ground_truth, CorrelationMode mode);

// Pearson correlation; absent when either side is constant.
std::optional<double> pearson_correlation(const std::vector<double>& x,
                                          const std::vector<double>& y);
// Spearman rank correlation with midranks for ties.
std::optional<double> spearman_correlation(const std::vector<double>& x,
                                           const std::vector<double>& y);
std::vector<double> midranks(const std::vector<double>& values);

// Lower score means more likely mislabeled. AUROC uses midranks for ties;
// requires both classes present. AUPR is the step-interpolated area with tie
// groups processed together; requires at least one flagged point.
double auroc_mislabeled(const std::vector<double>& scores, const std::vector<bool>& flags);
double aupr_mislabeled(const std::vector<double>& scores, const std::vector<bool>& flags);

// Fraction of flagged points with strictly negative score; 0 when nothing is
// flagged.
double negative_fraction(const std::vector<double>& scores, const std::vector<bool>& flags);

}  // namespace semval
