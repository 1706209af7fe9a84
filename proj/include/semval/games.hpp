#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "semval/dataset.hpp"
#include "semval/game.hpp"
#include "semval/retrain.hpp"

namespace semval {

// Model under explanation for feature-attribution games.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual int input_dim() const = 0;
  virtual int output_dim() const = 0;
  virtual void predict(const double* x, double* out) const = 0;
  virtual std::string fingerprint() const = 0;
};

class LinearPredictor : public Predictor {
 public:
  // w is output_dim x input_dim row-major; b has output_dim entries.
  LinearPredictor(int input_dim, int output_dim, std::vector<double> w, std::vector<double> b);
  int input_dim() const override { return d_; }
  int output_dim() const override { return m_; }
  void predict(const double* x, double* out) const override;
  std::string fingerprint() const override { return fingerprint_; }

 private:
  int d_, m_;
  std::vector<double> w_, b_;
  std::string fingerprint_;
};

// Wraps a retrained tabular model (ridge value or logistic probability) as a
// single-output predictor.
class FittedPredictorAdapter : public Predictor {
 public:
  FittedPredictorAdapter(FittedPredictor fitted, int input_dim, std::string fingerprint);
  int input_dim() const override { return d_; }
  int output_dim() const override { return 1; }
  void predict(const double* x, double* out) const override;
  std::string fingerprint() const override { return fingerprint_; }

 private:
  FittedPredictor fitted_;
  int d_;
  std::string fingerprint_;
};

// v(S) = sum of member weights; v(empty) = 0.
CooperativeGame make_additive_game(std::vector<double> weights);

// v(S) = 1 if S contains every required player, else 0.
CooperativeGame make_unanimity_game(int n, const std::vector<int>& required);

// v(S) = 1 if |S| > n/2.
CooperativeGame make_majority_game(int n);

// v given by an explicit table indexed by coalition mask (size 2^n).
CooperativeGame make_table_game(int n, std::vector<double> values, const std::string& tag);

// Table game with values drawn uniformly from [lo, hi).
CooperativeGame make_random_table_game(int n, std::uint64_t seed, double lo = -1.0,
                                       double hi = 1.0);

// Feature-masking game: members of S keep their value from `instance`, the
// rest are replaced by `baseline`; v(S) is the predictor's target output.
CooperativeGame make_feature_game(std::shared_ptr<const Predictor> predictor,
                                  std::vector<double> instance, std::vector<double> baseline,
                                  int target_output = 0);

// Data-valuation game: v(T) = holdout metric of the learner retrained on T.
CooperativeGame make_valuation_game(std::shared_ptr<const RetrainValuer> valuer);

// Datamodels game: v(T) = retrained model's output (or loss) at one query.
CooperativeGame make_datamodels_game(std::shared_ptr<const RetrainValuer> valuer,
                                     LabeledPoint query, DatamodelsOutput output);

}  // namespace semval
