#include "semval/games.hpp"

#include <cmath>
#include <utility>

#include "semval/errors.hpp"
#include "semval/fingerprint.hpp"
#include "semval/rng.hpp"
#include "semval/simd/kernels.hpp"

namespace semval {

LinearPredictor::LinearPredictor(int input_dim, int output_dim, std::vector<double> w,
                                 std::vector<double> b)
    : d_(input_dim), m_(output_dim), w_(std::move(w)), b_(std::move(b)) {
  if (d_ < 1 || m_ < 1) throw InvalidArgument("linear predictor: bad dimensions");
  if (w_.size() != static_cast<std::size_t>(d_) * m_ || b_.size() != static_cast<std::size_t>(m_)) {
    throw InvalidArgument("linear predictor: parameter shape mismatch");
  }
  std::vector<double> all = w_;
  all.insert(all.end(), b_.begin(), b_.end());
  fingerprint_ = fingerprint_doubles("linear_predictor", all);
}

void LinearPredictor::predict(const double* x, double* out) const {
  simd::matvec(w_.data(), x, out, static_cast<std::size_t>(m_), static_cast<std::size_t>(d_));
  simd::axpy(1.0, b_.data(), out, static_cast<std::size_t>(m_));
}

FittedPredictorAdapter::FittedPredictorAdapter(FittedPredictor fitted, int input_dim,
                                               std::string fingerprint)
    : fitted_(std::move(fitted)), d_(input_dim), fingerprint_(std::move(fingerprint)) {}

void FittedPredictorAdapter::predict(const double* x, double* out) const {
  out[0] = fitted_.predict(x, d_);
}

CooperativeGame make_additive_game(std::vector<double> weights) {
  const int n = static_cast<int>(weights.size());
  if (n == 0) throw InvalidArgument("additive game: empty weight vector");
  const std::string fp = fingerprint_doubles("additive", weights);
  auto w = std::make_shared<std::vector<double>>(std::move(weights));
  return CooperativeGame(n, true, fp, [w](const Coalition& s) {
    double acc = 0.0;
    for (int i : s.members()) acc += (*w)[static_cast<std::size_t>(i)];
    return acc;
  });
}

CooperativeGame make_unanimity_game(int n, const std::vector<int>& required) {
  if (n <= 0) throw InvalidArgument("unanimity game: bad player count");
  Coalition req(n);
  for (int i : required) req.add(i);
  if (req.empty()) throw InvalidArgument("unanimity game: required set must be non-empty");
  std::vector<double> enc(required.begin(), required.end());
  enc.push_back(n);
  const std::string fp = fingerprint_doubles("unanimity", enc);
  return CooperativeGame(n, true, fp, [req](const Coalition& s) {
    for (int i : req.members()) {
      if (!s.contains(i)) return 0.0;
    }
    return 1.0;
  });
}

CooperativeGame make_majority_game(int n) {
  if (n <= 0) throw InvalidArgument("majority game: bad player count");
  const std::vector<double> enc{static_cast<double>(n)};
  return CooperativeGame(n, true, fingerprint_doubles("majority", enc),
                         [n](const Coalition& s) { return s.size() * 2 > n ? 1.0 : 0.0; });
}

CooperativeGame make_table_game(int n, std::vector<double> values, const std::string& tag) {
  if (n <= 0 || n > 30) throw InvalidArgument("table game: player count must be in [1, 30]");
  if (values.size() != (std::size_t{1} << n)) {
    throw InvalidArgument("table game: table size must be 2^n");
  }
  const std::string fp = fingerprint_doubles("table:" + tag, values);
  auto v = std::make_shared<std::vector<double>>(std::move(values));
  return CooperativeGame(n, true, fp, [v](const Coalition& s) {
    return (*v)[static_cast<std::size_t>(s.mask())];
  });
}

CooperativeGame make_random_table_game(int n, std::uint64_t seed, double lo, double hi) {
  if (hi <= lo) throw InvalidArgument("random table game: empty value range");
  Rng rng(seed);
  std::vector<double> values(std::size_t{1} << n);
  for (double& v : values) v = lo + (hi - lo) * rng.uniform();
  return make_table_game(n, std::move(values), "random:" + std::to_string(seed));
}

CooperativeGame make_feature_game(std::shared_ptr<const Predictor> predictor,
                                  std::vector<double> instance, std::vector<double> baseline,
                                  int target_output) {
  if (!predictor) throw InvalidArgument("feature game: missing predictor");
  const int d = predictor->input_dim();
  if (static_cast<int>(instance.size()) != d || static_cast<int>(baseline.size()) != d) {
    throw InvalidArgument("feature game: instance/baseline dimension mismatch");
  }
  if (target_output < 0 || target_output >= predictor->output_dim()) {
    throw InvalidArgument("feature game: target output out of range");
  }
  std::vector<double> enc = instance;
  enc.insert(enc.end(), baseline.begin(), baseline.end());
  enc.push_back(target_output);
  std::uint64_t h = fnv1a64("feature:" + predictor->fingerprint());
  for (double v : enc) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    h = fnv1a64_bytes(h, &bits, sizeof(bits));
  }
  auto inst = std::make_shared<std::vector<double>>(std::move(instance));
  auto base = std::make_shared<std::vector<double>>(std::move(baseline));
  return CooperativeGame(
      d, true, hex64(h), [predictor, inst, base, target_output, d](const Coalition& s) {
        std::vector<double> hybrid = *base;
        for (int i : s.members()) hybrid[static_cast<std::size_t>(i)] = (*inst)[static_cast<std::size_t>(i)];
        std::vector<double> out(static_cast<std::size_t>(predictor->output_dim()));
        predictor->predict(hybrid.data(), out.data());
        return out[static_cast<std::size_t>(target_output)];
      });
}

CooperativeGame make_valuation_game(std::shared_ptr<const RetrainValuer> valuer) {
  if (!valuer) throw InvalidArgument("valuation game: missing valuer");
  return CooperativeGame(valuer->num_points(), true, "valuation:" + valuer->fingerprint(),
                         [valuer](const Coalition& s) {
                           const std::vector<int> rows = s.members();
                           return valuer->metric_value(rows);
                         });
}

CooperativeGame make_datamodels_game(std::shared_ptr<const RetrainValuer> valuer,
                                     LabeledPoint query, DatamodelsOutput output) {
  if (!valuer) throw InvalidArgument("datamodels game: missing valuer");
  if (static_cast<int>(query.x.size()) != valuer->train().dim) {
    throw InvalidArgument("datamodels game: query dimension mismatch");
  }
  std::vector<double> enc = query.x;
  enc.push_back(query.y);
  enc.push_back(static_cast<double>(output));
  const std::string fp =
      "datamodels:" + valuer->fingerprint() + ":" + fingerprint_doubles("query", enc);
  auto q = std::make_shared<LabeledPoint>(std::move(query));
  return CooperativeGame(valuer->num_points(), true, fp,
                         [valuer, q, output](const Coalition& s) {
                           const std::vector<int> rows = s.members();
                           return valuer->output_at(rows, *q, output);
                         });
}

}  // namespace semval
