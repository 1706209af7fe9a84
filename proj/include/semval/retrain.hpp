#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semval/dataset.hpp"

namespace semval {

enum class LearnerKind { kRidge, kLogisticNewton };
enum class HoldoutMetric { kAccuracy, kNegLoss };

// Deterministic retraining recipe behind valuation and datamodels games.
// Ridge is closed form; logistic runs a fixed number of Newton steps from
// zero, so single-class subsets stay finite without convergence checks.
struct RetrainConfig {
  LearnerKind learner = LearnerKind::kRidge;
  double regularization = 1e-3;
  int newton_steps = 8;
  HoldoutMetric metric = HoldoutMetric::kAccuracy;
};

struct FittedPredictor {
  bool constant = false;
  double constant_value = 0.0;
  LearnerKind kind = LearnerKind::kRidge;
  std::vector<double> w;
  double intercept = 0.0;

  // Ridge: linear value. Logistic: probability of class 1.
  double predict(const double* x, int dim) const;
};

enum class DatamodelsOutput { kPrediction, kLoss };

// Shared engine for games whose value is "retrain on a subset, then score".
// All operations are pure given (rows, extra); the fit counter is the only
// mutable state and backs evaluation accounting.
class RetrainValuer {
 public:
  RetrainValuer(Dataset train, Dataset holdout, RetrainConfig cfg);

  int num_points() const { return train_.num_rows(); }
  const Dataset& train() const { return train_; }
  const Dataset& holdout() const { return holdout_; }
  const RetrainConfig& config() const { return cfg_; }
  bool classification() const { return classification_; }

  // Holdout metric of the learner fit on the row multiset (plus optional extra
  // point). Empty selection yields the prior predictor: holdout majority class
  // in classification mode, holdout label mean otherwise.
  double metric_value(std::span<const int> rows, const LabeledPoint* extra = nullptr) const;

  // Fitted model's output at a query point: raw prediction, or its loss
  // against the query's label.
  double output_at(std::span<const int> rows, const LabeledPoint& query,
                   DatamodelsOutput output) const;

  std::uint64_t fits() const { return fits_->load(std::memory_order_relaxed); }
  std::string fingerprint() const { return fingerprint_; }

 private:
  FittedPredictor fit(std::span<const int> rows, const LabeledPoint* extra) const;
  double score_holdout(const FittedPredictor& p) const;

  Dataset train_;
  Dataset holdout_;
  RetrainConfig cfg_;
  bool classification_ = false;
  double prior_value_ = 0.0;
  std::string fingerprint_;
  std::shared_ptr<std::atomic<std::uint64_t>> fits_;
};

}  // namespace semval
