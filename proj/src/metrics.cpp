#include "semval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "semval/errors.hpp"
#include "semval/math_util.hpp"

namespace semval {

std::optional<double> pearson_correlation(const std::vector<double>& x,
                                          const std::vector<double>& y) {
  if (x.size() != y.size()) throw InvalidArgument("pearson: length mismatch");
  const std::size_t n = x.size();
  if (n < 2) return std::nullopt;
  const double mx = mean(x), my = mean(y);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> midranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> spearman_correlation(const std::vector<double>& x,
                                           const std::vector<double>& y) {
  if (x.size() != y.size()) throw InvalidArgument("spearman: length mismatch");
  if (x.size() < 2) return std::nullopt;
  return pearson_correlation(midranks(x), midranks(y));
}

namespace {

void append_optional(std::vector<double>& dst, const std::optional<double>& v) {
  if (v.has_value()) dst.push_back(*v);
}

std::optional<double> mean_or_absent(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  return mean(v);
}

}  // namespace

MetricReport compare(const std::vector<std::vector<double>>& estimates,
                     const std::vector<std::vector<double>>& ground_truth, CorrelationMode mode,
                     std::uint64_t evals_total) {
  if (estimates.size() != ground_truth.size()) {
    throw InvalidArgument("compare: estimates and ground truth must align");
  }
  if (estimates.empty()) throw InvalidArgument("compare: no examples");

  MetricReport rep;
  rep.evals_total = evals_total;
  rep.num_examples = static_cast<int>(estimates.size());
  rep.label_dim = static_cast<int>(ground_truth.front().size());

  std::vector<double> flat_est, flat_truth;
  std::vector<double> per_example_pearson, per_example_spearman;
  std::uint64_t sign_matches = 0, present = 0;
  double sq_sum = 0.0;

  for (std::size_t e = 0; e < estimates.size(); ++e) {
    const std::vector<double>& est = estimates[e];
    const std::vector<double>& truth = ground_truth[e];
    if (est.size() != truth.size()) throw InvalidArgument("compare: label dimension mismatch");
    std::vector<double> row_est, row_truth;
    for (std::size_t k = 0; k < est.size(); ++k) {
      if (!std::isfinite(truth[k])) throw InvalidArgument("compare: ground truth must be finite");
      if (NoisyLabelRecord::is_missing(est[k])) {
        ++rep.num_missing;
        continue;
      }
      const double d = est[k] - truth[k];
      sq_sum += d * d;
      ++present;
      if ((est[k] >= 0.0) == (truth[k] >= 0.0)) ++sign_matches;
      row_est.push_back(est[k]);
      row_truth.push_back(truth[k]);
    }
    flat_est.insert(flat_est.end(), row_est.begin(), row_est.end());
    flat_truth.insert(flat_truth.end(), row_truth.begin(), row_truth.end());
    if (mode == CorrelationMode::kPerExample) {
      append_optional(per_example_pearson, pearson_correlation(row_est, row_truth));
      append_optional(per_example_spearman, spearman_correlation(row_est, row_truth));
    }
  }
  if (present == 0) throw InvalidArgument("compare: no present estimate coordinates");

  rep.mse = sq_sum / static_cast<double>(present);
  rep.sign_agreement = static_cast<double>(sign_matches) / static_cast<double>(present);
  const double truth_var = variance_population(flat_truth);
  if (truth_var > 0.0) rep.mse_normalized = rep.mse / truth_var;
  if (mode == CorrelationMode::kPerExample) {
    rep.pearson = mean_or_absent(per_example_pearson);
    rep.spearman = mean_or_absent(per_example_spearman);
  } else {
    rep.pearson = pearson_correlation(flat_est, flat_truth);
    rep.spearman = spearman_correlation(flat_est, flat_truth);
  }
  return rep;
}

MetricReport compare(const std::vector<NoisyLabelRecord>& estimates,
                     const std::vector<std::vector<double>>& ground_truth, CorrelationMode mode) {
  if (estimates.size() != ground_truth.size()) {
    throw InvalidArgument("compare: estimates and ground truth must align");
  }
  std::vector<std::vector<double>> est_vecs;
  std::vector<std::vector<double>> truth_vecs;
  std::uint64_t evals = 0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    evals += estimates[i].evals_used;
    if (estimates[i].failed) continue;
    est_vecs.push_back(estimates[i].label);
    truth_vecs.push_back(ground_truth[i]);
  }
  if (est_vecs.empty()) throw InvalidArgument("compare: all records failed");
  return compare(est_vecs, truth_vecs, mode, evals);
}

namespace {

void check_scores(const std::vector<double>& scores, const std::vector<bool>& flags) {
  if (scores.size() != flags.size()) throw InvalidArgument("scores and flags must align");
  if (scores.empty()) throw InvalidArgument("no scores");
  for (double s : scores) {
    if (std::isnan(s)) throw InvalidArgument("score is NaN");
  }
}

}  // namespace

double auroc_mislabeled(const std::vector<double>& scores, const std::vector<bool>& flags) {
  check_scores(scores, flags);
  std::size_t flagged = 0;
  for (bool f : flags) flagged += f ? 1 : 0;
  const std::size_t clean = flags.size() - flagged;
  if (flagged == 0 || clean == 0) {
    throw InvalidArgument("auroc: flags must contain both classes");
  }
  // Rank-sum formulation on negated scores: low score ranks high as a
  // mislabeled candidate.
  std::vector<double> neg(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) neg[i] = -scores[i];
  const std::vector<double> ranks = midranks(neg);
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (flags[i]) rank_sum += ranks[i];
  }
  const double n1 = static_cast<double>(flagged);
  return (rank_sum - n1 * (n1 + 1.0) / 2.0) / (n1 * static_cast<double>(clean));
}

double aupr_mislabeled(const std::vector<double>& scores, const std::vector<bool>& flags) {
  check_scores(scores, flags);
  std::size_t flagged = 0;
  for (bool f : flags) flagged += f ? 1 : 0;
  if (flagged == 0) throw InvalidArgument("aupr: no flagged points");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Most suspicious first: ascending score.
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  const double total_pos = static_cast<double>(flagged);
  double tp = 0.0, fp = 0.0, area = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    double block_tp = 0.0, block_fp = 0.0;
    // A tie block enters the ranking as one unit.
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      if (flags[order[j]]) {
        block_tp += 1.0;
      } else {
        block_fp += 1.0;
      }
      ++j;
    }
    const double prev_tp = tp;
    tp += block_tp;
    fp += block_fp;
    const double precision = tp / (tp + fp);
    area += (tp - prev_tp) / total_pos * precision;
    i = j;
  }
  return area;
}

double negative_fraction(const std::vector<double>& scores, const std::vector<bool>& flags) {
  check_scores(scores, flags);
  std::size_t flagged = 0, negative = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (flags[i]) {
      ++flagged;
      if (scores[i] < 0.0) ++negative;
    }
  }
  if (flagged == 0) return 0.0;
  return static_cast<double>(negative) / static_cast<double>(flagged);
}

}  // namespace semval
