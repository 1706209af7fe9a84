#include "semval/retrain.hpp"

#include <cmath>

#include "semval/errors.hpp"
#include "semval/fingerprint.hpp"
#include "semval/linalg.hpp"
#include "semval/simd/kernels.hpp"

namespace semval {

namespace {

double sigmoid(double s) { return 1.0 / (1.0 + std::exp(-s)); }

double clamp_prob(double p) {
  const double eps = 1e-12;
  return p < eps ? eps : (p > 1.0 - eps ? 1.0 - eps : p);
}

bool labels_binary(const Dataset& ds) {
  for (double y : ds.labels) {
    if (y != 0.0 && y != 1.0) return false;
  }
  return true;
}

}  // namespace

double FittedPredictor::predict(const double* x, int dim) const {
  if (constant) return constant_value;
  const double s = simd::dot(w.data(), x, static_cast<std::size_t>(dim)) + intercept;
  return kind == LearnerKind::kLogisticNewton ? sigmoid(s) : s;
}

RetrainValuer::RetrainValuer(Dataset train, Dataset holdout, RetrainConfig cfg)
    : train_(std::move(train)), holdout_(std::move(holdout)), cfg_(cfg) {
  if (train_.num_rows() == 0 || holdout_.num_rows() == 0) {
    throw InvalidArgument("retrain valuer: train and holdout must be non-empty");
  }
  if (train_.dim != holdout_.dim) {
    throw InvalidArgument("retrain valuer: train/holdout feature dimension mismatch");
  }
  if (cfg_.regularization <= 0.0) {
    throw InvalidArgument("retrain valuer: regularization must be positive");
  }
  if (cfg_.newton_steps < 1) throw InvalidArgument("retrain valuer: newton_steps must be >= 1");

  classification_ = cfg_.metric == HoldoutMetric::kAccuracy ||
                    cfg_.learner == LearnerKind::kLogisticNewton;
  if (classification_ && (!labels_binary(train_) || !labels_binary(holdout_))) {
    throw InvalidArgument("retrain valuer: classification mode requires 0/1 labels");
  }

  if (classification_) {
    int ones = 0;
    for (double y : holdout_.labels) ones += (y == 1.0);
    // Ties break toward class 0.
    prior_value_ = (2 * ones > holdout_.num_rows()) ? 1.0 : 0.0;
  } else {
    double s = 0.0;
    for (double y : holdout_.labels) s += y;
    prior_value_ = s / holdout_.num_rows();
  }

  std::uint64_t h = fnv1a64("retrain");
  const auto mix_str = [&h](const std::string& s) { h = fnv1a64_bytes(h, s.data(), s.size()); };
  mix_str(train_.fingerprint());
  mix_str(holdout_.fingerprint());
  const int learner = static_cast<int>(cfg_.learner);
  const int metric = static_cast<int>(cfg_.metric);
  h = fnv1a64_bytes(h, &learner, sizeof(learner));
  h = fnv1a64_bytes(h, &metric, sizeof(metric));
  h = fnv1a64_bytes(h, &cfg_.regularization, sizeof(double));
  h = fnv1a64_bytes(h, &cfg_.newton_steps, sizeof(int));
  fingerprint_ = hex64(h);
  fits_ = std::make_shared<std::atomic<std::uint64_t>>(0);
}

FittedPredictor RetrainValuer::fit(std::span<const int> rows, const LabeledPoint* extra) const {
  fits_->fetch_add(1, std::memory_order_relaxed);
  const int d = train_.dim;
  const std::size_t dsz = static_cast<std::size_t>(d);
  const int m = static_cast<int>(rows.size()) + (extra ? 1 : 0);

  if (m == 0) {
    FittedPredictor p;
    p.constant = true;
    p.constant_value = prior_value_;
    p.kind = cfg_.learner;
    return p;
  }
  for (int r : rows) {
    if (r < 0 || r >= train_.num_rows()) throw InvalidArgument("retrain valuer: row out of range");
  }
  if (extra && static_cast<int>(extra->x.size()) != d) {
    throw InvalidArgument("retrain valuer: extra point dimension mismatch");
  }

  // Row accessors over the multiset (train rows plus the optional extra).
  const auto row_x = [&](int j) -> const double* {
    return j < static_cast<int>(rows.size()) ? train_.row(rows[static_cast<std::size_t>(j)])
                                             : extra->x.data();
  };
  const auto row_y = [&](int j) -> double {
    return j < static_cast<int>(rows.size())
               ? train_.labels[static_cast<std::size_t>(rows[static_cast<std::size_t>(j)])]
               : extra->y;
  };

  FittedPredictor p;
  p.kind = cfg_.learner;
  p.w.assign(dsz, 0.0);

  if (cfg_.learner == LearnerKind::kRidge) {
    std::vector<double> xbar(dsz, 0.0);
    double ybar = 0.0;
    for (int j = 0; j < m; ++j) {
      simd::axpy(1.0, row_x(j), xbar.data(), dsz);
      ybar += row_y(j);
    }
    simd::scal(1.0 / m, xbar.data(), dsz);
    ybar /= m;

    std::vector<double> gram(dsz * dsz, 0.0);
    std::vector<double> rhs(dsz, 0.0);
    std::vector<double> xc(dsz);
    for (int j = 0; j < m; ++j) {
      const double* x = row_x(j);
      for (int t = 0; t < d; ++t) xc[static_cast<std::size_t>(t)] = x[t] - xbar[static_cast<std::size_t>(t)];
      for (int t = 0; t < d; ++t) {
        simd::axpy(xc[static_cast<std::size_t>(t)], xc.data(), gram.data() + static_cast<std::size_t>(t) * dsz, dsz);
      }
      simd::axpy(row_y(j) - ybar, xc.data(), rhs.data(), dsz);
    }
    for (int t = 0; t < d; ++t) gram[static_cast<std::size_t>(t) * dsz + t] += cfg_.regularization;
    p.w = solve_spd_with_ridge_fallback(gram, rhs, d);
    p.intercept = ybar - simd::dot(p.w.data(), xbar.data(), dsz);
    return p;
  }

  // Logistic with L2 on the coefficients (not the intercept), fixed Newton
  // step count from zero. The (d+1)-dim Newton system includes the intercept.
  const int dp = d + 1;
  const std::size_t dpsz = static_cast<std::size_t>(dp);
  std::vector<double> beta(dpsz, 0.0);  // [w..., intercept]
  std::vector<double> hess(dpsz * dpsz);
  std::vector<double> grad(dpsz);
  std::vector<double> zrow(dpsz);
  for (int step = 0; step < cfg_.newton_steps; ++step) {
    std::fill(hess.begin(), hess.end(), 0.0);
    std::fill(grad.begin(), grad.end(), 0.0);
    for (int j = 0; j < m; ++j) {
      const double* x = row_x(j);
      for (int t = 0; t < d; ++t) zrow[static_cast<std::size_t>(t)] = x[t];
      zrow[dsz] = 1.0;
      const double s = simd::dot(beta.data(), zrow.data(), dpsz);
      const double pr = sigmoid(s);
      const double wgt = pr * (1.0 - pr);
      simd::axpy(pr - row_y(j), zrow.data(), grad.data(), dpsz);
      for (int t = 0; t < dp; ++t) {
        simd::axpy(wgt * zrow[static_cast<std::size_t>(t)], zrow.data(),
                   hess.data() + static_cast<std::size_t>(t) * dpsz, dpsz);
      }
    }
    for (int t = 0; t < d; ++t) {
      grad[static_cast<std::size_t>(t)] += cfg_.regularization * beta[static_cast<std::size_t>(t)];
      hess[static_cast<std::size_t>(t) * dpsz + t] += cfg_.regularization;
    }
    // Tiny intercept damping keeps the system nonsingular on degenerate data.
    hess[dsz * dpsz + d] += 1e-10;
    const std::vector<double> delta = solve_spd_with_ridge_fallback(hess, grad, dp);
    for (int t = 0; t < dp; ++t) beta[static_cast<std::size_t>(t)] -= delta[static_cast<std::size_t>(t)];
    for (double b : beta) {
      if (!std::isfinite(b)) throw NumericalError("logistic newton produced non-finite parameters");
    }
  }
  for (int t = 0; t < d; ++t) p.w[static_cast<std::size_t>(t)] = beta[static_cast<std::size_t>(t)];
  p.intercept = beta[dsz];
  return p;
}

double RetrainValuer::score_holdout(const FittedPredictor& p) const {
  const int n = holdout_.num_rows();
  double acc = 0.0;
  if (cfg_.metric == HoldoutMetric::kAccuracy) {
    for (int i = 0; i < n; ++i) {
      const double pred = p.predict(holdout_.row(i), holdout_.dim);
      const int cls = pred >= 0.5 ? 1 : 0;
      acc += (cls == static_cast<int>(holdout_.labels[static_cast<std::size_t>(i)]));
    }
    return acc / n;
  }
  if (cfg_.learner == LearnerKind::kLogisticNewton) {
    for (int i = 0; i < n; ++i) {
      const double pr = clamp_prob(p.predict(holdout_.row(i), holdout_.dim));
      const double y = holdout_.labels[static_cast<std::size_t>(i)];
      acc += y * std::log(pr) + (1.0 - y) * std::log(1.0 - pr);
    }
    return acc / n;
  }
  for (int i = 0; i < n; ++i) {
    const double e = p.predict(holdout_.row(i), holdout_.dim) -
                     holdout_.labels[static_cast<std::size_t>(i)];
    acc += e * e;
  }
  return -acc / n;
}

double RetrainValuer::metric_value(std::span<const int> rows, const LabeledPoint* extra) const {
  return score_holdout(fit(rows, extra));
}

double RetrainValuer::output_at(std::span<const int> rows, const LabeledPoint& query,
                                DatamodelsOutput output) const {
  const FittedPredictor p = fit(rows, nullptr);
  const double pred = p.predict(query.x.data(), train_.dim);
  if (output == DatamodelsOutput::kPrediction) return pred;
  if (cfg_.learner == LearnerKind::kLogisticNewton) {
    const double pr = clamp_prob(pred);
    return -(query.y * std::log(pr) + (1.0 - query.y) * std::log(1.0 - pr));
  }
  const double e = pred - query.y;
  return e * e;
}

}  // namespace semval
