#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "semval/coalition.hpp"
#include "semval/dataset.hpp"
#include "semval/errors.hpp"
#include "semval/games.hpp"
#include "semval/retrain.hpp"

using namespace semval;

TEST_CASE("coalition membership operations") {
  Coalition s(5);
  CHECK(s.empty());
  CHECK(s.size() == 0);
  s.add(0);
  s.add(3);
  CHECK(s.contains(0));
  CHECK(s.contains(3));
  CHECK_FALSE(s.contains(1));
  CHECK(s.size() == 2);
  s.remove(0);
  CHECK_FALSE(s.contains(0));
  CHECK(s.size() == 1);

  const Coalition with3 = Coalition(5).with(3);
  CHECK(s == with3);
  CHECK(s.without(3).empty());
}

TEST_CASE("coalition complement and members") {
  Coalition s = Coalition::from_mask(0b10101, 5);
  CHECK(s.size() == 3);
  const std::vector<int> mem = s.members();
  CHECK(mem == std::vector<int>{0, 2, 4});
  const Coalition c = s.complement();
  CHECK(c.members() == std::vector<int>{1, 3});
  CHECK(c.complement() == s);
  CHECK(s.mask() == 0b10101u);

  Coalition full(3);
  full.add(0);
  full.add(1);
  full.add(2);
  CHECK(full.full());
  CHECK(full.complement().empty());
}

TEST_CASE("coalition rejects out-of-range input") {
  CHECK_THROWS_AS(Coalition::from_mask(0b1000, 3), InvalidArgument);
  Coalition s(4);
  CHECK_THROWS_AS(s.add(4), InvalidArgument);
  CHECK_THROWS_AS(s.add(-1), InvalidArgument);
}

TEST_CASE("coalitions beyond 64 players") {
  Coalition s(100);
  s.add(0);
  s.add(70);
  s.add(99);
  CHECK(s.size() == 3);
  CHECK(s.contains(70));
  CHECK(s.complement().size() == 97);
  CHECK(s.members() == std::vector<int>{0, 70, 99});
  CHECK_THROWS_AS(s.mask(), InvalidArgument);  // does not fit one word
}

TEST_CASE("game counts evaluations and copies share the counter") {
  CooperativeGame g = make_additive_game({1.0, 2.0, 3.0});
  CHECK(g.evals() == 0);
  Coalition s(3);
  s.add(1);
  CHECK(g.value(s) == doctest::Approx(2.0));
  CHECK(g.evals() == 1);
  CooperativeGame copy = g;
  copy.value(s);
  CHECK(g.evals() == 2);
  g.reset_evals();
  CHECK(copy.evals() == 0);
}

TEST_CASE("game rejects a coalition of the wrong width") {
  CooperativeGame g = make_additive_game({1.0, 2.0});
  CHECK_THROWS_AS(g.value(Coalition(3)), InvalidArgument);
}

TEST_CASE("additive game sums member weights") {
  CooperativeGame g = make_additive_game({0.5, -0.25, 0.75});
  CHECK(g.value(Coalition(3)) == doctest::Approx(0.0));
  CHECK(g.value(Coalition::from_mask(0b111, 3)) == doctest::Approx(1.0));
  CHECK(g.value(Coalition::from_mask(0b101, 3)) == doctest::Approx(1.25));
}

TEST_CASE("unanimity game requires every named player") {
  CooperativeGame g = make_unanimity_game(3, {0, 1});
  CHECK(g.value(Coalition::from_mask(0b011, 3)) == doctest::Approx(1.0));
  CHECK(g.value(Coalition::from_mask(0b111, 3)) == doctest::Approx(1.0));
  CHECK(g.value(Coalition::from_mask(0b001, 3)) == doctest::Approx(0.0));
  CHECK(g.value(Coalition::from_mask(0b110, 3)) == doctest::Approx(0.0));
  CHECK_THROWS_AS(make_unanimity_game(3, {}), InvalidArgument);
  CHECK_THROWS_AS(make_unanimity_game(3, {3}), InvalidArgument);
}

TEST_CASE("majority game flips strictly above half") {
  CooperativeGame g = make_majority_game(4);
  CHECK(g.value(Coalition::from_mask(0b0011, 4)) == doctest::Approx(0.0));  // half is not enough
  CHECK(g.value(Coalition::from_mask(0b0111, 4)) == doctest::Approx(1.0));
}

TEST_CASE("table game indexes by mask and validates size") {
  CooperativeGame g = make_table_game(2, {10.0, 11.0, 12.0, 13.0}, "t");
  CHECK(g.value(Coalition::from_mask(0b10, 2)) == doctest::Approx(12.0));
  CHECK_THROWS_AS(make_table_game(2, {1.0, 2.0}, "bad"), InvalidArgument);
}

TEST_CASE("random table game is seed-deterministic") {
  CooperativeGame a = make_random_table_game(4, 7);
  CooperativeGame b = make_random_table_game(4, 7);
  CooperativeGame c = make_random_table_game(4, 8);
  bool any_diff = false;
  for (unsigned mask = 0; mask < 16; ++mask) {
    const Coalition s = Coalition::from_mask(mask, 4);
    const double va = a.value(s);
    CHECK(va == b.value(s));
    CHECK(va >= -1.0);
    CHECK(va < 1.0);
    any_diff = any_diff || va != c.value(s);
  }
  CHECK(any_diff);
  CHECK(a.fingerprint() == b.fingerprint());
  CHECK(a.fingerprint() != c.fingerprint());
}

TEST_CASE("linear predictor computes wx + b") {
  LinearPredictor p(2, 2, {1.0, 0.0, 0.0, -1.0}, {0.5, 0.0});
  const std::vector<double> x{2.0, 3.0};
  std::vector<double> out(2);
  p.predict(x.data(), out.data());
  CHECK(out[0] == doctest::Approx(2.5));
  CHECK(out[1] == doctest::Approx(-3.0));
}

TEST_CASE("feature game blends instance and baseline by membership") {
  auto p = std::make_shared<LinearPredictor>(3, 1, std::vector<double>{1.0, 10.0, 100.0},
                                             std::vector<double>{0.0});
  CooperativeGame g = make_feature_game(p, {1.0, 1.0, 1.0}, {0.0, 0.0, 0.0});
  CHECK(g.num_players() == 3);
  CHECK(g.value(Coalition(3)) == doctest::Approx(0.0));
  CHECK(g.value(Coalition::from_mask(0b010, 3)) == doctest::Approx(10.0));
  CHECK(g.value(Coalition::from_mask(0b111, 3)) == doctest::Approx(111.0));
  CHECK_THROWS_AS(make_feature_game(p, {1.0}, {0.0, 0.0, 0.0}), InvalidArgument);
}

TEST_CASE("blobs generator is deterministic and honors the flip fraction") {
  const Dataset a = make_blobs(40, 3, 0.5, 0.25, 99);
  const Dataset b = make_blobs(40, 3, 0.5, 0.25, 99);
  CHECK(a.fingerprint() == b.fingerprint());
  CHECK(a.num_rows() == 40);
  CHECK(a.dim == 3);
  int flipped = 0;
  for (int i = 0; i < a.num_rows(); ++i) flipped += a.flipped[static_cast<std::size_t>(i)] ? 1 : 0;
  CHECK(flipped == 10);  // round(0.25 * 40)
  // A flipped row's stored label disagrees with its generating class half.
  for (int i = 0; i < a.num_rows(); ++i) {
    const double clean = i < 20 ? 0.0 : 1.0;
    if (a.flipped[static_cast<std::size_t>(i)]) {
      CHECK(a.labels[static_cast<std::size_t>(i)] == doctest::Approx(1.0 - clean));
    } else {
      CHECK(a.labels[static_cast<std::size_t>(i)] == doctest::Approx(clean));
    }
  }
}

TEST_CASE("csv round trip preserves the dataset exactly") {
  const Dataset d = make_blobs(12, 2, 0.7, 0.0, 5);
  const std::string path = "/tmp/semval_test_blobs.csv";
  save_csv(d, path);
  const Dataset back = load_csv(path);
  REQUIRE(back.num_rows() == d.num_rows());
  REQUIRE(back.dim == d.dim);
  for (std::size_t i = 0; i < d.features.size(); ++i) CHECK(back.features[i] == d.features[i]);
  for (std::size_t i = 0; i < d.labels.size(); ++i) CHECK(back.labels[i] == d.labels[i]);
}

namespace {

RetrainValuer make_ridge_valuer() {
  RetrainConfig cfg;
  cfg.learner = LearnerKind::kRidge;
  cfg.metric = HoldoutMetric::kNegLoss;
  return RetrainValuer(make_blobs(6, 2, 0.8, 0.0, 11), make_blobs(8, 2, 0.8, 0.0, 12), cfg);
}

}  // namespace

TEST_CASE("retrain valuer reproduces frozen reference values") {
  // Frozen from a reference run of this configuration; guards the whole
  // fit-and-score stack (blob generation, centering, solver, scoring).
  const RetrainValuer ridge = make_ridge_valuer();
  const std::vector<int> some{0, 2, 4};
  const std::vector<int> all{0, 1, 2, 3, 4, 5};
  CHECK(ridge.metric_value({}) == doctest::Approx(-0.25).epsilon(1e-12));
  CHECK(ridge.metric_value(some) == doctest::Approx(-0.3584366267559681).epsilon(1e-12));
  CHECK(ridge.metric_value(all) == doctest::Approx(-0.14271721340730395).epsilon(1e-12));

  RetrainConfig lcfg;
  lcfg.learner = LearnerKind::kLogisticNewton;
  lcfg.metric = HoldoutMetric::kAccuracy;
  const RetrainValuer logi(make_blobs(6, 2, 0.8, 0.0, 11), make_blobs(8, 2, 0.8, 0.0, 12), lcfg);
  CHECK(logi.metric_value({}) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(logi.metric_value(some) == doctest::Approx(0.875).epsilon(1e-12));
  CHECK(logi.metric_value(all) == doctest::Approx(0.875).epsilon(1e-12));

  const LabeledPoint query = ridge.train().point(1);
  CHECK(ridge.output_at(some, query, DatamodelsOutput::kLoss) ==
        doctest::Approx(0.095207770647501563).epsilon(1e-12));
  CHECK(ridge.output_at(some, query, DatamodelsOutput::kPrediction) ==
        doctest::Approx(-0.30855756456049099).epsilon(1e-12));
}

TEST_CASE("valuer value depends only on the selected point multiset") {
  // Rows 0 and 1 of the train set are made identical; selecting either one
  // must give identical fits.
  Dataset train = make_blobs(6, 2, 0.8, 0.0, 11);
  train.features[2] = train.features[0];
  train.features[3] = train.features[1];
  train.labels[1] = train.labels[0];
  RetrainConfig cfg;
  cfg.learner = LearnerKind::kRidge;
  cfg.metric = HoldoutMetric::kNegLoss;
  const RetrainValuer v(train, make_blobs(8, 2, 0.8, 0.0, 12), cfg);
  const std::vector<int> with0{0, 4, 5};
  const std::vector<int> with1{1, 4, 5};
  CHECK(v.metric_value(with0) == v.metric_value(with1));
}

TEST_CASE("single-class subsets stay finite under the logistic learner") {
  Dataset train = make_blobs(6, 2, 0.8, 0.0, 11);
  RetrainConfig cfg;
  cfg.learner = LearnerKind::kLogisticNewton;
  cfg.metric = HoldoutMetric::kAccuracy;
  const RetrainValuer v(train, make_blobs(8, 2, 0.8, 0.0, 12), cfg);
  // First half of the blobs is class 0.
  const double value = v.metric_value(std::vector<int>{0, 1, 2});
  CHECK(std::isfinite(value));
  CHECK(value >= 0.0);
  CHECK(value <= 1.0);
}

TEST_CASE("valuation game counts one fit per evaluation") {
  auto valuer = std::make_shared<RetrainValuer>(make_ridge_valuer());
  CooperativeGame g = make_valuation_game(valuer);
  CHECK(g.num_players() == 6);
  Coalition s(6);
  s.add(0);
  s.add(3);
  const double direct = valuer->metric_value(std::vector<int>{0, 3});
  CHECK(g.value(s) == doctest::Approx(direct).epsilon(1e-15));
  CHECK(g.evals() == 1);
}

TEST_CASE("datamodels game evaluates the query under both output modes") {
  auto valuer = std::make_shared<RetrainValuer>(make_ridge_valuer());
  const LabeledPoint query = valuer->train().point(2);
  CooperativeGame loss_game = make_datamodels_game(valuer, query, DatamodelsOutput::kLoss);
  CooperativeGame pred_game = make_datamodels_game(valuer, query, DatamodelsOutput::kPrediction);
  const Coalition s = Coalition::from_mask(0b110, 6);
  const double loss = loss_game.value(s);
  const double pred = pred_game.value(s);
  CHECK(loss == doctest::Approx(
                    valuer->output_at(std::vector<int>{1, 2}, query, DatamodelsOutput::kLoss)));
  CHECK(loss >= 0.0);
  CHECK(std::isfinite(pred));
}

TEST_CASE("rescaling regularization changes the ridge fit") {
  RetrainConfig weak;
  weak.learner = LearnerKind::kRidge;
  weak.metric = HoldoutMetric::kNegLoss;
  weak.regularization = 1e-6;
  RetrainConfig strong = weak;
  strong.regularization = 10.0;
  const Dataset train = make_blobs(6, 2, 0.8, 0.0, 11);
  const Dataset holdout = make_blobs(8, 2, 0.8, 0.0, 12);
  const RetrainValuer a(train, holdout, weak);
  const RetrainValuer b(train, holdout, strong);
  const std::vector<int> all{0, 1, 2, 3, 4, 5};
  CHECK(a.metric_value(all) != b.metric_value(all));
  CHECK(a.fingerprint() != b.fingerprint());
}
