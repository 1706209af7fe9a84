#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "semval/record.hpp"
#include "semval/rng.hpp"

namespace semval {

// Input to an amortized model: identifier, feature vector, and (for per-class
// heads) the class whose output coordinate the scalar label belongs to.
struct ContextRecord {
  std::string id;
  std::vector<double> features;
  int class_index = -1;
};

enum class ModelKind { kLinear, kMlp };

struct ModelConfig {
  ModelKind kind = ModelKind::kLinear;
  int input_dim = 0;
  int output_dim = 0;
  int hidden = 64;           // MLP hidden width
  bool use_bias = false;     // linear output bias (MLP always carries biases)
  bool per_class_head = false;
};

// Predicts labels from context features. Parameters live in the rescaled label
// space; predict() multiplies by label_scale so callers always see original
// units.
struct AmortizedModel {
  ModelConfig cfg;
  double label_scale = 1.0;
  // Linear: w is output_dim x input_dim (+ bias). MLP: tanh hidden layer.
  std::vector<double> w, bias;
  std::vector<double> w1, b1, w2, b2;

  static AmortizedModel init(const ModelConfig& cfg, std::uint64_t seed);

  // Raw output in rescaled space; hidden_buf needs cfg.hidden doubles for the
  // MLP (unused for linear).
  void forward(const double* x, double* hidden_buf, double* out) const;
  std::vector<double> predict(std::span<const double> features) const;

  std::size_t parameter_count() const;
};

enum class PreprocessMode { kNone, kGlobalStdRescale, kPerLabelUnitNorm };

struct PreprocessResult {
  PreprocessMode mode = PreprocessMode::kNone;
  double scale = 1.0;    // divide labels by this; model predictions multiply back
  bool biased = false;   // unit-norm changes the estimand
  std::vector<std::string> skipped;  // zero-norm records, marked failed
};

// Rewrites labels in place. Global rescale divides every entry by the pooled
// standard deviation; unit-norm scales each record to unit length (and flags
// the batch biased, since that no longer estimates the original quantity).
PreprocessResult preprocess_labels(std::vector<NoisyLabelRecord>* records, PreprocessMode mode);

struct TrainConfig {
  int epochs = 200;
  int batch_size = 32;
  double learning_rate = 1e-2;
  double momentum = 0.9;
  double val_fraction = 0.2;
  std::uint64_t seed = 0;
  PreprocessMode preprocess = PreprocessMode::kNone;
};

struct TrainResult {
  AmortizedModel model;  // parameters from the best validation epoch
  int best_epoch = -1;
  double best_val_loss = 0.0;
  std::vector<double> train_curve;
  std::vector<double> val_curve;
  bool labels_biased = false;
  double label_scale = 1.0;
  int used_records = 0;
  std::vector<std::string> skipped_contexts;
};

// Minibatch SGD with momentum on mean squared error against the (possibly
// noisy) labels. Failed records are skipped; NaN label coordinates are masked
// out of loss and gradient; scalar labels with a per-class head train only the
// labeled class's output. Returns the parameters with the best validation
// loss, not the final iterate.
TrainResult train_regression(const std::vector<ContextRecord>& contexts,
                             std::vector<NoisyLabelRecord> labels, const ModelConfig& model_cfg,
                             const TrainConfig& train_cfg);

struct ProjectedSgdConfig {
  int steps = 0;        // T
  double radius = 1.0;  // Frobenius-ball radius D
  double alpha = 0.0;   // strong convexity, 2 * lambda_min of the context
                        // second-moment matrix
};

// Draws one (context, label) pair per call.
using SampleFn = std::function<void(Rng&, double* context_out, double* label_out)>;

struct ProjectedSgdResult {
  std::vector<int> snapshot_steps;
  // 2t/(T(T+1))-weighted iterate averages, one per snapshot, each output_dim x
  // input_dim row-major.
  std::vector<std::vector<double>> theta_bar;
  std::vector<double> iterate_norms;  // ||theta_t||_F per step
};

// Projected SGD for a linear model with the decaying steps 2/(alpha (t+1)),
// Frobenius-ball projection, and tail-weighted iterate averaging. Snapshots
// must be ascending; the last one is the step count actually run.
ProjectedSgdResult train_linear_projected_sgd(const SampleFn& sample, int input_dim, int output_dim,
                             const ProjectedSgdConfig& cfg, std::uint64_t seed,
                             std::vector<int> snapshot_steps);

// Uniform draws from stored contexts; labels redrawn through `oracle` each
// visit when provided, otherwise the stored label is reused.
SampleFn make_empirical_sampler(
    const std::vector<ContextRecord>& contexts, const std::vector<std::vector<double>>& labels,
    const std::function<std::vector<double>(int context_index, Rng& rng)>& oracle = nullptr);

struct LabelBatchMeta {
  std::string task;
  std::string method;
  std::string game_fingerprint;
};

using ContextOracle = std::function<NoisyLabelRecord(int context_index, std::uint64_t seed)>;

// One record per context with the seed derived from (base_seed, context id),
// generated in parallel. Oracle exceptions become failed records rather than
// aborting the batch.
std::vector<NoisyLabelRecord> build_label_dataset(const std::vector<ContextRecord>& contexts,
                                                  const ContextOracle& oracle,
                                                  std::uint64_t base_seed, int workers);

}  // namespace semval
