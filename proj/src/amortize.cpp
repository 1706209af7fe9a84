#include "semval/amortize.hpp"

#include <algorithm>
#include <cmath>

#include "semval/errors.hpp"
#include "semval/math_util.hpp"
#include "semval/parallel.hpp"
#include "semval/simd/kernels.hpp"

namespace semval {

namespace {

void validate_model_config(const ModelConfig& cfg) {
  if (cfg.input_dim < 1 || cfg.output_dim < 1) {
    throw InvalidArgument("model config: dimensions must be positive");
  }
  if (cfg.kind == ModelKind::kMlp && cfg.hidden < 1) {
    throw InvalidArgument("model config: hidden width must be positive");
  }
}

void glorot_fill(std::vector<double>& w, int fan_in, int fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  for (double& v : w) v = limit * (2.0 * rng.uniform() - 1.0);
}

}  // namespace

AmortizedModel AmortizedModel::init(const ModelConfig& cfg, std::uint64_t seed) {
  validate_model_config(cfg);
  AmortizedModel m;
  m.cfg = cfg;
  Rng rng(seed);
  const std::size_t d = static_cast<std::size_t>(cfg.input_dim);
  const std::size_t out = static_cast<std::size_t>(cfg.output_dim);
  if (cfg.kind == ModelKind::kLinear) {
    m.w.resize(out * d);
    glorot_fill(m.w, cfg.input_dim, cfg.output_dim, rng);
    if (cfg.use_bias) m.bias.assign(out, 0.0);
  } else {
    const std::size_t h = static_cast<std::size_t>(cfg.hidden);
    m.w1.resize(h * d);
    m.b1.assign(h, 0.0);
    m.w2.resize(out * h);
    m.b2.assign(out, 0.0);
    glorot_fill(m.w1, cfg.input_dim, cfg.hidden, rng);
    glorot_fill(m.w2, cfg.hidden, cfg.output_dim, rng);
  }
  return m;
}

void AmortizedModel::forward(const double* x, double* hidden_buf, double* out) const {
  const std::size_t d = static_cast<std::size_t>(cfg.input_dim);
  const std::size_t m = static_cast<std::size_t>(cfg.output_dim);
  if (cfg.kind == ModelKind::kLinear) {
    simd::matvec(w.data(), x, out, m, d);
    if (!bias.empty()) simd::axpy(1.0, bias.data(), out, m);
    return;
  }
  const std::size_t h = static_cast<std::size_t>(cfg.hidden);
  simd::matvec(w1.data(), x, hidden_buf, h, d);
  simd::axpy(1.0, b1.data(), hidden_buf, h);
  for (std::size_t i = 0; i < h; ++i) hidden_buf[i] = std::tanh(hidden_buf[i]);
  simd::matvec(w2.data(), hidden_buf, out, m, h);
  simd::axpy(1.0, b2.data(), out, m);
}

std::vector<double> AmortizedModel::predict(std::span<const double> features) const {
  if (static_cast<int>(features.size()) != cfg.input_dim) {
    throw InvalidArgument("predict: feature dimension mismatch");
  }
  std::vector<double> hidden(cfg.kind == ModelKind::kMlp ? static_cast<std::size_t>(cfg.hidden)
                                                         : 0);
  std::vector<double> out(static_cast<std::size_t>(cfg.output_dim));
  forward(features.data(), hidden.data(), out.data());
  simd::scal(label_scale, out.data(), out.size());
  return out;
}

std::size_t AmortizedModel::parameter_count() const {
  return w.size() + bias.size() + w1.size() + b1.size() + w2.size() + b2.size();
}

PreprocessResult preprocess_labels(std::vector<NoisyLabelRecord>* records, PreprocessMode mode) {
  PreprocessResult result;
  result.mode = mode;
  if (!records) throw InvalidArgument("preprocess_labels: null records");
  if (mode == PreprocessMode::kNone) return result;

  if (mode == PreprocessMode::kGlobalStdRescale) {
    // Pooled standard deviation over every present coordinate of every usable
    // record; scale-equivariant, so rescaled labels are invariant to a global
    // scaling of the originals.
    double sum = 0.0, sumsq = 0.0;
    std::uint64_t count = 0;
    for (const NoisyLabelRecord& rec : *records) {
      if (rec.failed) continue;
      for (double v : rec.label) {
        if (NoisyLabelRecord::is_missing(v)) continue;
        sum += v;
        sumsq += v * v;
        ++count;
      }
    }
    if (count < 2) throw InvalidArgument("global_std_rescale: needs at least 2 label entries");
    const double meanv = sum / static_cast<double>(count);
    const double var = sumsq / static_cast<double>(count) - meanv * meanv;
    if (!(var > 0.0)) {
      throw NumericalError("global_std_rescale: labels are constant, pooled std is zero");
    }
    result.scale = std::sqrt(var);
    const double inv = 1.0 / result.scale;
    for (NoisyLabelRecord& rec : *records) {
      if (rec.failed) continue;
      for (double& v : rec.label) {
        if (!NoisyLabelRecord::is_missing(v)) v *= inv;
      }
    }
    return result;
  }

  // Per-record unit norm. Changes what the labels estimate, hence biased.
  result.biased = true;
  for (NoisyLabelRecord& rec : *records) {
    if (rec.failed) continue;
    double norm_sq = 0.0;
    for (double v : rec.label) {
      if (!NoisyLabelRecord::is_missing(v)) norm_sq += v * v;
    }
    const double norm = std::sqrt(norm_sq);
    if (norm < 1e-12) {
      rec.failed = true;
      rec.error = "per_label_unit_norm: zero-norm label skipped";
      result.skipped.push_back(rec.context_id);
      continue;
    }
    for (double& v : rec.label) {
      if (!NoisyLabelRecord::is_missing(v)) v /= norm;
    }
    rec.biased = true;
  }
  return result;
}

namespace {

struct TrainingSet {
  int input_dim = 0;
  int label_dim = 0;  // model output dim
  std::vector<const ContextRecord*> contexts;
  std::vector<const NoisyLabelRecord*> records;
};

// Loss and gradient accumulation share this scratch space.
struct Workspace {
  std::vector<double> hidden, out, delta_out, delta_hidden;
};

double example_loss_and_grad(const AmortizedModel& model, const ContextRecord& ctx,
                             const NoisyLabelRecord& rec, bool per_class, Workspace& ws,
                             AmortizedModel* grad) {
  const ModelConfig& cfg = model.cfg;
  const std::size_t d = static_cast<std::size_t>(cfg.input_dim);
  const std::size_t m = static_cast<std::size_t>(cfg.output_dim);
  ws.out.resize(m);
  ws.delta_out.assign(m, 0.0);
  if (cfg.kind == ModelKind::kMlp) ws.hidden.resize(static_cast<std::size_t>(cfg.hidden));
  model.forward(ctx.features.data(), ws.hidden.data(), ws.out.data());

  double loss = 0.0;
  if (per_class) {
    if (ctx.class_index < 0 || ctx.class_index >= cfg.output_dim) {
      throw InvalidArgument("train: context '" + ctx.id + "' has no valid class index");
    }
    const double y = rec.label[0];
    const double e = ws.out[static_cast<std::size_t>(ctx.class_index)] - y;
    ws.delta_out[static_cast<std::size_t>(ctx.class_index)] = 2.0 * e;
    loss = e * e;
  } else {
    for (std::size_t j = 0; j < m; ++j) {
      const double y = rec.label[j];
      if (NoisyLabelRecord::is_missing(y)) continue;
      const double e = ws.out[j] - y;
      ws.delta_out[j] = 2.0 * e;
      loss += e * e;
    }
  }
  if (!grad) return loss;

  if (cfg.kind == ModelKind::kLinear) {
    for (std::size_t j = 0; j < m; ++j) {
      if (ws.delta_out[j] != 0.0) {
        simd::axpy(ws.delta_out[j], ctx.features.data(), grad->w.data() + j * d, d);
      }
    }
    if (!grad->bias.empty()) simd::axpy(1.0, ws.delta_out.data(), grad->bias.data(), m);
    return loss;
  }
  const std::size_t h = static_cast<std::size_t>(cfg.hidden);
  ws.delta_hidden.assign(h, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    if (ws.delta_out[j] != 0.0) {
      simd::axpy(ws.delta_out[j], ws.hidden.data(), grad->w2.data() + j * h, h);
      simd::axpy(ws.delta_out[j], model.w2.data() + j * h, ws.delta_hidden.data(), h);
    }
  }
  simd::axpy(1.0, ws.delta_out.data(), grad->b2.data(), m);
  for (std::size_t i = 0; i < h; ++i) {
    ws.delta_hidden[i] *= 1.0 - ws.hidden[i] * ws.hidden[i];
  }
  for (std::size_t i = 0; i < h; ++i) {
    if (ws.delta_hidden[i] != 0.0) {
      simd::axpy(ws.delta_hidden[i], ctx.features.data(), grad->w1.data() + i * d, d);
    }
  }
  simd::axpy(1.0, ws.delta_hidden.data(), grad->b1.data(), h);
  return loss;
}

void zero_like(const AmortizedModel& model, AmortizedModel* grad) {
  grad->cfg = model.cfg;
  grad->w.assign(model.w.size(), 0.0);
  grad->bias.assign(model.bias.size(), 0.0);
  grad->w1.assign(model.w1.size(), 0.0);
  grad->b1.assign(model.b1.size(), 0.0);
  grad->w2.assign(model.w2.size(), 0.0);
  grad->b2.assign(model.b2.size(), 0.0);
}

void apply_momentum(std::vector<double>& param, std::vector<double>& velocity,
                    const std::vector<double>& grad, double lr, double momentum, double inv_batch) {
  for (std::size_t i = 0; i < param.size(); ++i) {
    velocity[i] = momentum * velocity[i] - lr * grad[i] * inv_batch;
    param[i] += velocity[i];
  }
}

double dataset_loss(const AmortizedModel& model, const TrainingSet& ts,
                    const std::vector<int>& idx, bool per_class, Workspace& ws) {
  if (idx.empty()) return 0.0;
  std::vector<double> losses;
  losses.reserve(idx.size());
  for (int i : idx) {
    losses.push_back(example_loss_and_grad(model, *ts.contexts[static_cast<std::size_t>(i)],
                                           *ts.records[static_cast<std::size_t>(i)], per_class, ws,
                                           nullptr));
  }
  return mean(losses);
}

}  // namespace

TrainResult train_regression(const std::vector<ContextRecord>& contexts,
                             std::vector<NoisyLabelRecord> labels, const ModelConfig& model_cfg,
                             const TrainConfig& train_cfg) {
  validate_model_config(model_cfg);
  if (contexts.size() != labels.size()) {
    throw InvalidArgument("train: contexts and labels must align one-to-one");
  }
  if (train_cfg.epochs < 1 || train_cfg.batch_size < 1) {
    throw InvalidArgument("train: epochs and batch size must be positive");
  }
  if (train_cfg.val_fraction < 0.0 || train_cfg.val_fraction >= 1.0) {
    throw InvalidArgument("train: val_fraction must lie in [0, 1)");
  }

  TrainResult result;
  const PreprocessResult prep = preprocess_labels(&labels, train_cfg.preprocess);
  result.labels_biased = prep.biased;
  result.label_scale = prep.scale;

  TrainingSet ts;
  ts.input_dim = model_cfg.input_dim;
  ts.label_dim = model_cfg.output_dim;
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    const ContextRecord& ctx = contexts[i];
    const NoisyLabelRecord& rec = labels[i];
    if (rec.failed) {
      result.skipped_contexts.push_back(ctx.id);
      continue;
    }
    if (static_cast<int>(ctx.features.size()) != model_cfg.input_dim) {
      throw InvalidArgument("train: context '" + ctx.id + "' feature dimension mismatch");
    }
    const std::size_t want = model_cfg.per_class_head ? 1 : static_cast<std::size_t>(model_cfg.output_dim);
    if (rec.label.size() != want) {
      throw InvalidArgument("train: context '" + ctx.id + "' label dimension mismatch");
    }
    ts.contexts.push_back(&ctx);
    ts.records.push_back(&rec);
  }
  const int usable = static_cast<int>(ts.contexts.size());
  if (usable < 2) throw InvalidArgument("train: fewer than 2 usable records");
  result.used_records = usable;

  Rng rng(train_cfg.seed);
  std::vector<int> order(static_cast<std::size_t>(usable));
  for (int i = 0; i < usable; ++i) order[static_cast<std::size_t>(i)] = i;
  rng.shuffle(order.data(), order.size());
  const int val_count = static_cast<int>(std::lround(train_cfg.val_fraction * usable));
  std::vector<int> val_idx(order.begin(), order.begin() + val_count);
  std::vector<int> train_idx(order.begin() + val_count, order.end());
  if (train_idx.empty()) throw InvalidArgument("train: validation split leaves no training data");

  AmortizedModel model = AmortizedModel::init(model_cfg, rng.next_u64());
  model.label_scale = prep.scale;
  AmortizedModel grad, velocity;
  zero_like(model, &grad);
  zero_like(model, &velocity);
  Workspace ws;

  AmortizedModel best = model;
  double best_val = std::numeric_limits<double>::infinity();
  int best_epoch = -1;

  const auto step_batch = [&](const int* idx, int count) {
    zero_like(model, &grad);
    for (int b = 0; b < count; ++b) {
      example_loss_and_grad(model, *ts.contexts[static_cast<std::size_t>(idx[b])],
                            *ts.records[static_cast<std::size_t>(idx[b])],
                            model_cfg.per_class_head, ws, &grad);
    }
    const double inv = 1.0 / count;
    apply_momentum(model.w, velocity.w, grad.w, train_cfg.learning_rate, train_cfg.momentum, inv);
    apply_momentum(model.bias, velocity.bias, grad.bias, train_cfg.learning_rate,
                   train_cfg.momentum, inv);
    apply_momentum(model.w1, velocity.w1, grad.w1, train_cfg.learning_rate, train_cfg.momentum,
                   inv);
    apply_momentum(model.b1, velocity.b1, grad.b1, train_cfg.learning_rate, train_cfg.momentum,
                   inv);
    apply_momentum(model.w2, velocity.w2, grad.w2, train_cfg.learning_rate, train_cfg.momentum,
                   inv);
    apply_momentum(model.b2, velocity.b2, grad.b2, train_cfg.learning_rate, train_cfg.momentum,
                   inv);
  };

  for (int epoch = 0; epoch < train_cfg.epochs; ++epoch) {
    rng.shuffle(train_idx.data(), train_idx.size());
    for (std::size_t start = 0; start < train_idx.size(); start += static_cast<std::size_t>(train_cfg.batch_size)) {
      const int count = static_cast<int>(
          std::min<std::size_t>(train_cfg.batch_size, train_idx.size() - start));
      step_batch(train_idx.data() + start, count);
    }
    for (double v : model.w) {
      if (!std::isfinite(v)) throw NumericalError("train: linear weights diverged");
    }
    for (double v : model.w1) {
      if (!std::isfinite(v)) throw NumericalError("train: hidden weights diverged");
    }
    result.train_curve.push_back(dataset_loss(model, ts, train_idx, model_cfg.per_class_head, ws));
    const double val_loss = val_idx.empty()
                                ? result.train_curve.back()
                                : dataset_loss(model, ts, val_idx, model_cfg.per_class_head, ws);
    result.val_curve.push_back(val_loss);
    if (val_loss < best_val) {
      best_val = val_loss;
      best = model;
      best_epoch = epoch;
    }
  }

  best.label_scale = prep.scale;
  result.model = std::move(best);
  result.best_epoch = best_epoch;
  result.best_val_loss = best_val;
  return result;
}

ProjectedSgdResult train_linear_projected_sgd(const SampleFn& sample, int input_dim, int output_dim,
                             const ProjectedSgdConfig& cfg, std::uint64_t seed,
                             std::vector<int> snapshot_steps) {
  if (!sample) throw InvalidArgument("projected sgd: missing sampler");
  if (input_dim < 1 || output_dim < 1) throw InvalidArgument("projected sgd: bad dimensions");
  if (cfg.steps < 1) throw InvalidArgument("projected sgd: steps must be >= 1");
  if (!(cfg.radius > 0.0)) throw InvalidArgument("projected sgd: radius must be positive");
  if (!(cfg.alpha > 0.0)) throw InvalidArgument("projected sgd: alpha must be positive");
  if (snapshot_steps.empty()) snapshot_steps.assign(1, cfg.steps);
  for (std::size_t i = 0; i < snapshot_steps.size(); ++i) {
    if (snapshot_steps[i] < 1 || snapshot_steps[i] > cfg.steps ||
        (i > 0 && snapshot_steps[i] <= snapshot_steps[i - 1])) {
      throw InvalidArgument("projected sgd: snapshots must be ascending within [1, steps]");
    }
  }

  const std::size_t d = static_cast<std::size_t>(input_dim);
  const std::size_t m = static_cast<std::size_t>(output_dim);
  const std::size_t psz = d * m;
  Rng rng(seed);
  std::vector<double> theta(psz, 0.0);
  std::vector<double> weighted_sum(psz, 0.0);  // sum of 2t * theta_t
  std::vector<double> b(d), label(m), resid(m);

  ProjectedSgdResult result;
  result.snapshot_steps = snapshot_steps;
  result.theta_bar.reserve(snapshot_steps.size());
  result.iterate_norms.reserve(static_cast<std::size_t>(cfg.steps));
  std::size_t next_snapshot = 0;

  for (int t = 1; t <= cfg.steps; ++t) {
    sample(rng, b.data(), label.data());
    simd::matvec(theta.data(), b.data(), resid.data(), m, d);
    simd::axpy(-1.0, label.data(), resid.data(), m);
    const double eta = 2.0 / (cfg.alpha * (t + 1));
    // theta -= eta * 2 * resid * b^T, row by row.
    for (std::size_t j = 0; j < m; ++j) {
      simd::axpy(-2.0 * eta * resid[j], b.data(), theta.data() + j * d, d);
    }
    const double fro = std::sqrt(simd::sumsq(theta.data(), psz));
    if (!std::isfinite(fro)) throw NumericalError("projected sgd: iterate diverged");
    if (fro > cfg.radius) simd::scal(cfg.radius / fro, theta.data(), psz);
    result.iterate_norms.push_back(std::min(fro, cfg.radius));
    simd::axpy(2.0 * t, theta.data(), weighted_sum.data(), psz);
    if (next_snapshot < snapshot_steps.size() && t == snapshot_steps[next_snapshot]) {
      std::vector<double> bar = weighted_sum;
      simd::scal(1.0 / (static_cast<double>(t) * (t + 1)), bar.data(), psz);
      result.theta_bar.push_back(std::move(bar));
      ++next_snapshot;
    }
  }
  return result;
}

SampleFn make_empirical_sampler(
    const std::vector<ContextRecord>& contexts, const std::vector<std::vector<double>>& labels,
    const std::function<std::vector<double>(int context_index, Rng& rng)>& oracle) {
  if (contexts.empty()) throw InvalidArgument("empirical sampler: no contexts");
  if (!oracle && contexts.size() != labels.size()) {
    throw InvalidArgument("empirical sampler: stored labels must align with contexts");
  }
  return [&contexts, &labels, oracle](Rng& rng, double* b, double* y) {
    const int i = static_cast<int>(rng.uniform_below(contexts.size()));
    const std::vector<double>& feat = contexts[static_cast<std::size_t>(i)].features;
    std::copy(feat.begin(), feat.end(), b);
    const std::vector<double> lab =
        oracle ? oracle(i, rng) : labels[static_cast<std::size_t>(i)];
    std::copy(lab.begin(), lab.end(), y);
  };
}

std::vector<NoisyLabelRecord> build_label_dataset(const std::vector<ContextRecord>& contexts,
                                                  const ContextOracle& oracle,
                                                  std::uint64_t base_seed, int workers) {
  if (!oracle) throw InvalidArgument("build_label_dataset: missing oracle");
  std::vector<NoisyLabelRecord> records(contexts.size());
  parallel_for(static_cast<int>(contexts.size()), workers, [&](int i) {
    const std::uint64_t seed = mix_seed(base_seed, contexts[static_cast<std::size_t>(i)].id);
    NoisyLabelRecord rec;
    try {
      rec = oracle(i, seed);
    } catch (const std::exception& e) {
      rec = NoisyLabelRecord{};
      rec.seed = seed;
      rec.failed = true;
      rec.error = e.what();
    }
    rec.context_id = contexts[static_cast<std::size_t>(i)].id;
    records[static_cast<std::size_t>(i)] = std::move(rec);
  });
  return records;
}

}  // namespace semval
