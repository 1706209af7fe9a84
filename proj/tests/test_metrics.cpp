#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "semval/errors.hpp"
#include "semval/metrics.hpp"
#include "semval/rng.hpp"

using namespace semval;

namespace {
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
}

TEST_CASE("pearson correlation basics") {
  CHECK(*pearson_correlation({1.0, 2.0, 3.0}, {2.0, 4.0, 6.0}) == doctest::Approx(1.0));
  CHECK(*pearson_correlation({1.0, 2.0, 3.0}, {-2.0, -4.0, -6.0}) == doctest::Approx(-1.0));
  CHECK_FALSE(pearson_correlation({5.0, 5.0, 5.0}, {1.0, 2.0, 3.0}).has_value());
  CHECK_FALSE(pearson_correlation({1.0, 2.0, 3.0}, {7.0, 7.0, 7.0}).has_value());
  CHECK_FALSE(pearson_correlation({1.0}, {2.0}).has_value());
  CHECK_THROWS_AS(pearson_correlation({1.0, 2.0}, {1.0}), InvalidArgument);

  SUBCASE("invariant to affine maps with positive slope") {
    Rng rng(3);
    std::vector<double> x(50), y(50), y2(50);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = rng.gauss();
      y[i] = 0.7 * x[i] + rng.gauss();
      y2[i] = 100.0 - 5.0 * y[i];  // negative slope flips the sign
    }
    const double r = *pearson_correlation(x, y);
    std::vector<double> shifted(x);
    for (double& v : shifted) v = 3.0 * v + 11.0;
    CHECK(*pearson_correlation(shifted, y) == doctest::Approx(r).epsilon(1e-12));
    CHECK(*pearson_correlation(x, y2) == doctest::Approx(-r).epsilon(1e-12));
    CHECK(std::abs(r) <= 1.0);
  }
}

TEST_CASE("midranks average over tie groups") {
  CHECK(midranks({10.0, 20.0, 20.0, 30.0}) == std::vector<double>{1.0, 2.5, 2.5, 4.0});
  CHECK(midranks({3.0, 1.0, 2.0}) == std::vector<double>{3.0, 1.0, 2.0});
  CHECK(midranks({4.0, 4.0, 4.0}) == std::vector<double>{2.0, 2.0, 2.0});
}

TEST_CASE("spearman correlation tracks monotone relationships") {
  std::vector<double> x = {-2.0, -1.0, 0.5, 1.5, 3.0};
  std::vector<double> cubed(x);
  for (double& v : cubed) v = v * v * v;
  CHECK(*spearman_correlation(x, cubed) == doctest::Approx(1.0));
  std::vector<double> reversed(x.rbegin(), x.rend());
  CHECK(*spearman_correlation(x, reversed) == doctest::Approx(-1.0));
  CHECK_FALSE(spearman_correlation({1.0, 1.0, 1.0}, {1.0, 2.0, 3.0}).has_value());
}

TEST_CASE("compare on identical vectors is a perfect score") {
  const std::vector<std::vector<double>> truth = {{1.0, -2.0, 3.0}, {0.5, 4.0, -1.0}};
  const MetricReport rep = compare(truth, truth, CorrelationMode::kGlobal, 123);
  CHECK(rep.mse == 0.0);
  CHECK(*rep.mse_normalized == 0.0);
  CHECK(*rep.pearson == doctest::Approx(1.0));
  CHECK(*rep.spearman == doctest::Approx(1.0));
  CHECK(rep.sign_agreement == 1.0);
  CHECK(rep.evals_total == 123);
  CHECK(rep.num_examples == 2);
  CHECK(rep.label_dim == 3);
  CHECK(rep.num_missing == 0);
}

TEST_CASE("predicting the truth mean everywhere scores normalized mse of one") {
  const std::vector<std::vector<double>> truth = {{1.0, 2.0}, {3.0, 6.0}};
  const double m = 3.0;  // mean of {1,2,3,6}
  const std::vector<std::vector<double>> est(2, std::vector<double>{m, m});
  const MetricReport rep = compare(est, truth, CorrelationMode::kGlobal);
  CHECK(*rep.mse_normalized == doctest::Approx(1.0).epsilon(1e-12));
  // Constant estimates carry no correlation.
  CHECK_FALSE(rep.pearson.has_value());
  CHECK_FALSE(rep.spearman.has_value());

  SUBCASE("constant ground truth leaves normalized mse absent") {
    const std::vector<std::vector<double>> flat = {{2.0, 2.0}, {2.0, 2.0}};
    const MetricReport r = compare(est, flat, CorrelationMode::kGlobal);
    CHECK_FALSE(r.mse_normalized.has_value());
    CHECK(r.mse == doctest::Approx(1.0));  // (3-2)^2 everywhere
  }
}

TEST_CASE("per-example correlation averages defined rows only") {
  // Row 1 perfectly correlated, row 2 perfectly anti-correlated, row 3
  // constant on the estimate side and therefore skipped.
  const std::vector<std::vector<double>> est = {
      {1.0, 2.0, 3.0}, {3.0, 2.0, 1.0}, {5.0, 5.0, 5.0}};
  const std::vector<std::vector<double>> truth = {
      {10.0, 20.0, 30.0}, {10.0, 20.0, 30.0}, {1.0, 2.0, 3.0}};
  const MetricReport rep = compare(est, truth, CorrelationMode::kPerExample);
  CHECK(*rep.pearson == doctest::Approx(0.0));
  CHECK(*rep.spearman == doctest::Approx(0.0));

  SUBCASE("all rows undefined means absent, not NaN") {
    const std::vector<std::vector<double>> flat = {{1.0, 1.0}, {2.0, 2.0}};
    const std::vector<std::vector<double>> tgt = {{1.0, 2.0}, {3.0, 4.0}};
    const MetricReport r = compare(flat, tgt, CorrelationMode::kPerExample);
    CHECK_FALSE(r.pearson.has_value());
    CHECK_FALSE(r.spearman.has_value());
  }
  SUBCASE("global mode pools the same data into one series") {
    const MetricReport global = compare(est, truth, CorrelationMode::kGlobal);
    REQUIRE(global.pearson.has_value());
    CHECK(*global.pearson != *rep.pearson);
  }
}

TEST_CASE("missing estimate coordinates are skipped and counted") {
  const std::vector<std::vector<double>> est = {{1.0, kNan}, {kNan, 4.0}};
  const std::vector<std::vector<double>> truth = {{2.0, 100.0}, {100.0, 6.0}};
  const MetricReport rep = compare(est, truth, CorrelationMode::kGlobal);
  CHECK(rep.num_missing == 2);
  CHECK(rep.mse == doctest::Approx((1.0 + 4.0) / 2.0));  // only the present pairs

  SUBCASE("rejections") {
    CHECK_THROWS_AS(compare(est, std::vector<std::vector<double>>{{1.0, 2.0}},
                            CorrelationMode::kGlobal),
                    InvalidArgument);
    CHECK_THROWS_AS(compare(std::vector<std::vector<double>>{}, {}, CorrelationMode::kGlobal),
                    InvalidArgument);
    CHECK_THROWS_AS(compare(est, std::vector<std::vector<double>>{{2.0}, {3.0}},
                            CorrelationMode::kGlobal),
                    InvalidArgument);
    const std::vector<std::vector<double>> nan_truth = {{kNan, 1.0}, {1.0, 1.0}};
    CHECK_THROWS_AS(compare(est, nan_truth, CorrelationMode::kGlobal), InvalidArgument);
    const std::vector<std::vector<double>> all_missing = {{kNan, kNan}, {kNan, kNan}};
    CHECK_THROWS_AS(compare(all_missing, truth, CorrelationMode::kGlobal), InvalidArgument);
  }
}

TEST_CASE("sign agreement treats zero as positive") {
  const std::vector<std::vector<double>> est = {{0.0, -1.0, 2.0, -3.0}};
  const std::vector<std::vector<double>> truth = {{1.0, -2.0, -2.0, 0.0}};
  // Matches: (0,1) yes, (-1,-2) yes, (2,-2) no, (-3,0) no.
  const MetricReport rep = compare(est, truth, CorrelationMode::kGlobal);
  CHECK(rep.sign_agreement == doctest::Approx(0.5));
}

TEST_CASE("record overload skips failed records and sums eval counts") {
  std::vector<NoisyLabelRecord> recs(3);
  recs[0].label = {1.0, 2.0};
  recs[0].evals_used = 10;
  recs[1].label = {9.0, 9.0};
  recs[1].evals_used = 25;
  recs[1].failed = true;
  recs[2].label = {3.0, 4.0};
  recs[2].evals_used = 7;
  const std::vector<std::vector<double>> truth = {{1.0, 2.0}, {0.0, 0.0}, {3.0, 4.0}};
  const MetricReport rep = compare(recs, truth, CorrelationMode::kGlobal);
  CHECK(rep.num_examples == 2);  // the failed record is gone
  CHECK(rep.mse == 0.0);
  CHECK(rep.evals_total == 42);  // but its cost still counts

  SUBCASE("all failed") {
    for (NoisyLabelRecord& r : recs) r.failed = true;
    CHECK_THROWS_AS(compare(recs, truth, CorrelationMode::kGlobal), InvalidArgument);
  }
}

TEST_CASE("auroc for mislabeled detection") {
  // Low score = suspected mislabeled. Flagged points hold the lowest scores.
  const std::vector<double> scores = {-2.0, -1.0, 1.0, 2.0, 3.0};
  const std::vector<bool> flags = {true, true, false, false, false};
  CHECK(auroc_mislabeled(scores, flags) == doctest::Approx(1.0));

  const std::vector<bool> inverted = {false, false, true, true, true};
  CHECK(auroc_mislabeled(scores, inverted) == doctest::Approx(0.0));

  SUBCASE("all tied scores give exactly one half") {
    const std::vector<double> tied(6, 0.5);
    const std::vector<bool> f = {true, false, true, false, false, true};
    CHECK(auroc_mislabeled(tied, f) == 0.5);
  }
  SUBCASE("invariant under strictly increasing transforms") {
    Rng rng(9);
    std::vector<double> s(200);
    std::vector<bool> f(200);
    for (std::size_t i = 0; i < s.size(); ++i) {
      f[i] = rng.uniform() < 0.3;
      s[i] = rng.gauss() - (f[i] ? 0.8 : 0.0);
    }
    const double base = auroc_mislabeled(s, f);
    std::vector<double> warped(s);
    for (double& v : warped) v = std::exp(0.5 * v) + v;
    CHECK(auroc_mislabeled(warped, f) == doctest::Approx(base).epsilon(1e-12));
    CHECK(base > 0.6);  // the shift separates the classes
  }
  SUBCASE("independent scores hover near one half") {
    Rng rng(17);
    std::vector<double> s(4000);
    std::vector<bool> f(4000);
    for (std::size_t i = 0; i < s.size(); ++i) {
      s[i] = rng.gauss();
      f[i] = (i % 2) == 0;
    }
    CHECK(auroc_mislabeled(s, f) == doctest::Approx(0.5).epsilon(0.06));
  }
  SUBCASE("rejections") {
    CHECK_THROWS_AS(auroc_mislabeled({1.0, 2.0}, {false, false}), InvalidArgument);
    CHECK_THROWS_AS(auroc_mislabeled({1.0, 2.0}, {true, true}), InvalidArgument);
    CHECK_THROWS_AS(auroc_mislabeled({1.0}, {true, false}), InvalidArgument);
    CHECK_THROWS_AS(auroc_mislabeled({kNan, 2.0}, {true, false}), InvalidArgument);
    CHECK_THROWS_AS(auroc_mislabeled({}, {}), InvalidArgument);
  }
}

TEST_CASE("aupr for mislabeled detection") {
  // Ascending scan: T, F, T, F gives precision steps 1 and 2/3.
  const std::vector<double> scores = {1.0, 2.0, 3.0, 4.0};
  const std::vector<bool> flags = {true, false, true, false};
  CHECK(aupr_mislabeled(scores, flags) == doctest::Approx(0.5 + 1.0 / 3.0));

  SUBCASE("perfect ranking scores one") {
    const std::vector<bool> perfect = {true, true, false, false};
    CHECK(aupr_mislabeled(scores, perfect) == doctest::Approx(1.0));
  }
  SUBCASE("everything flagged scores one regardless of order") {
    const std::vector<bool> all = {true, true, true, true};
    CHECK(aupr_mislabeled(scores, all) == doctest::Approx(1.0));
  }
  SUBCASE("a tie block enters as one unit") {
    const std::vector<double> tied = {1.0, 1.0, 2.0};
    const std::vector<bool> f = {true, false, false};
    // The tied pair lands together: precision 1/2 on the single positive.
    CHECK(aupr_mislabeled(tied, f) == doctest::Approx(0.5));
  }
  SUBCASE("rejections") {
    CHECK_THROWS_AS(aupr_mislabeled(scores, {false, false, false, false}), InvalidArgument);
    CHECK_THROWS_AS(aupr_mislabeled({kNan}, {true}), InvalidArgument);
  }
}

TEST_CASE("negative fraction of flagged points") {
  const std::vector<double> scores = {-1.0, -2.0, 3.0, -4.0};
  const std::vector<bool> flags = {true, true, true, false};
  CHECK(negative_fraction(scores, flags) == doctest::Approx(2.0 / 3.0));
  CHECK(negative_fraction(scores, {false, false, false, false}) == 0.0);
  CHECK(negative_fraction({0.0}, {true}) == 0.0);  // zero is not negative
  CHECK_THROWS_AS(negative_fraction({kNan}, {true}), InvalidArgument);
}
