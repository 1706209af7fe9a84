// Acceptance gate. Nine end-to-end checks, each printing exactly one
// PASS/FAIL line with the measured quantity and its limit; the exit code is
// the number of failures. Everything is seeded, so a failure reproduces
// bit-identically.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "semval/amortize.hpp"
#include "semval/dataset.hpp"
#include "semval/estimators.hpp"
#include "semval/exact.hpp"
#include "semval/games.hpp"
#include "semval/io.hpp"
#include "semval/math_util.hpp"
#include "semval/metrics.hpp"
#include "semval/retrain.hpp"
#include "semval/rng.hpp"
#include "semval/theory.hpp"

namespace {

using namespace semval;

int g_failures = 0;

void report(const std::string& name, bool pass, const std::string& detail, double seconds) {
  std::printf("%s  %-28s %s  [%.1fs]\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str(),
              seconds);
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

template <typename Fn>
void timed(const std::string& name, Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  bool pass = false;
  std::string detail;
  try {
    pass = fn(&detail);
  } catch (const std::exception& e) {
    pass = false;
    detail = std::string("exception: ") + e.what();
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report(name, pass, detail, seconds);
}

std::string fmt(double v) { return format_double(v); }

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

// --- 1. exact-oracle axioms --------------------------------------------------

std::uint32_t swap_bits(std::uint32_t mask, int i, int j) {
  const std::uint32_t bi = (mask >> i) & 1u;
  const std::uint32_t bj = (mask >> j) & 1u;
  if (bi == bj) return mask;
  return mask ^ ((1u << i) | (1u << j));
}

bool check_axioms(std::string* detail) {
  double worst = 0.0;
  for (int g = 0; g < 50; ++g) {
    const int n = 4 + g % 9;
    const std::uint32_t full = (1u << n) - 1u;
    const ValueTable a = enumerate_game(make_random_table_game(n, 9100 + g));
    const ValueTable b = enumerate_game(make_random_table_game(n, 9700 + g));
    const std::vector<double> phi_a = exact_shapley(a);
    const std::vector<double> phi_b = exact_shapley(b);

    // Attributions sum to the value swing of the grand coalition.
    const double total = std::accumulate(phi_a.begin(), phi_a.end(), 0.0);
    worst = std::max(worst, std::abs(total - (a.at(full) - a.at(0))));

    // Attribution of a weighted game combination is the weighted combination.
    const double ca = 0.7, cb = -1.3;
    ValueTable combo{n, std::vector<double>(a.v.size())};
    for (std::size_t m = 0; m < combo.v.size(); ++m) combo.v[m] = ca * a.v[m] + cb * b.v[m];
    const std::vector<double> phi_combo = exact_shapley(combo);
    for (int i = 0; i < n; ++i) {
      worst = std::max(worst, std::abs(phi_combo[static_cast<std::size_t>(i)] -
                                       (ca * phi_a[static_cast<std::size_t>(i)] +
                                        cb * phi_b[static_cast<std::size_t>(i)])));
    }

    // Symmetrizing the game over a swap of two players equalizes their shares.
    const int i = g % n;
    const int j = (g / n + 1 + i) % n == i ? (i + 1) % n : (g / n + 1 + i) % n;
    ValueTable sym{n, std::vector<double>(a.v.size())};
    for (std::uint32_t m = 0; m <= full; ++m) {
      sym.v[m] = 0.5 * (a.v[m] + a.v[swap_bits(m, i, j)]);
    }
    const std::vector<double> phi_sym = exact_shapley(sym);
    worst = std::max(worst, std::abs(phi_sym[static_cast<std::size_t>(i)] -
                                     phi_sym[static_cast<std::size_t>(j)]));

    // A player whose presence never changes the value gets exactly zero.
    const int p = n - 1;
    ValueTable nullp{n, std::vector<double>(a.v.size())};
    for (std::uint32_t m = 0; m <= full; ++m) nullp.v[m] = a.v[m & ~(1u << p)];
    const std::vector<double> phi_null = exact_shapley(nullp);
    worst = std::max(worst, std::abs(phi_null[static_cast<std::size_t>(p)]));
  }
  *detail = "efficiency/linearity/symmetry/null max deviation " + fmt(worst) +
            " over 50 games (limit 1e-9)";
  return worst <= 1e-9;
}

// --- 2. leave-one-out score equivalence --------------------------------------

bool check_datamodels_equivalence(std::string* detail) {
  double worst_routes = 0.0;
  double worst_banzhaf = 0.0;
  for (int n = 4; n <= 8; ++n) {
    const ValueTable table = enumerate_game(make_random_table_game(n, 4200 + n));
    for (const double q : {0.1, 0.5, 0.9}) {
      const std::vector<double> marginal = exact_datamodels(table, q);
      const std::vector<double> moments =
          exact_datamodels_symmetric(table, SubsetLaw::kBernoulli, q);
      const std::vector<double> regression =
          exact_weighted_ls(table, bernoulli_ls_kernel(n, q)).coeffs;
      worst_routes = std::max(worst_routes, max_abs_diff(marginal, moments));
      worst_routes = std::max(worst_routes, max_abs_diff(marginal, regression));
      if (q == 0.5) {
        worst_banzhaf = std::max(worst_banzhaf, max_abs_diff(marginal, exact_banzhaf(table)));
      }
    }
  }
  *detail = "route deviation " + fmt(worst_routes) + ", q=0.5 vs banzhaf " + fmt(worst_banzhaf) +
            " (limit 1e-9)";
  return worst_routes <= 1e-9 && worst_banzhaf <= 1e-9;
}

// --- 3. estimator unbiasedness -----------------------------------------------

// 20000 independent draws per suite; a coordinate exceeds when its draw mean
// sits more than 3 standard errors from the exact value. One exceedance per
// suite is within the error budget.
bool check_unbiasedness(std::string* detail) {
  constexpr int kDraws = 20000;
  constexpr int kN = 8;
  struct Suite {
    std::string name;
    std::function<std::vector<double>(const CooperativeGame&, const ValueTable&, std::uint64_t)>
        draw;
    std::function<std::vector<double>(const ValueTable&)> exact;
  };
  const SemivalueWeights shap_w = shapley_weights(kN);
  const SemivalueWeights banz_w = banzhaf_weights(kN);
  const SamplingPlan one{1};
  const std::vector<Suite> suites = {
      {"permutation",
       [](const CooperativeGame& g, const ValueTable&, std::uint64_t s) {
         return permutation_sampling(g, 1, s).label;
       },
       [](const ValueTable& t) { return exact_shapley(t); }},
      {"msr_banzhaf",
       [](const CooperativeGame& g, const ValueTable&, std::uint64_t s) {
         return msr_banzhaf(g, 32, s).label;
       },
       [](const ValueTable& t) { return exact_banzhaf(t); }},
      {"mc_semivalue/shapley",
       [&shap_w, &one](const CooperativeGame& g, const ValueTable&, std::uint64_t s) {
         std::vector<double> est(kN);
         for (int p = 0; p < kN; ++p) {
           est[static_cast<std::size_t>(p)] =
               mc_semivalue(g, p, shap_w, one, mix_seed(s, static_cast<std::uint64_t>(p)))
                   .label[0];
         }
         return est;
       },
       [](const ValueTable& t) { return exact_shapley(t); }},
      {"mc_semivalue/banzhaf",
       [&banz_w, &one](const CooperativeGame& g, const ValueTable&, std::uint64_t s) {
         std::vector<double> est(kN);
         for (int p = 0; p < kN; ++p) {
           est[static_cast<std::size_t>(p)] =
               mc_semivalue(g, p, banz_w, one, mix_seed(s, static_cast<std::uint64_t>(p)))
                   .label[0];
         }
         return est;
       },
       [](const ValueTable& t) { return exact_banzhaf(t); }},
      {"mc_datamodels",
       [](const CooperativeGame& g, const ValueTable&, std::uint64_t s) {
         std::vector<double> est(kN);
         for (int p = 0; p < kN; ++p) {
           est[static_cast<std::size_t>(p)] =
               mc_datamodels(g, p, 0.3, 1, mix_seed(s, static_cast<std::uint64_t>(p))).label[0];
         }
         return est;
       },
       [](const ValueTable& t) { return exact_datamodels(t, 0.3); }},
  };

  std::string worst_suite;
  double worst_z = 0.0;
  int worst_exceed = 0;
  bool pass = true;
  for (std::size_t si = 0; si < suites.size(); ++si) {
    int exceed = 0;
    for (int gi = 0; gi < 2; ++gi) {
      const CooperativeGame game = make_random_table_game(kN, 7300 + gi);
      const ValueTable table = enumerate_game(game);
      const std::vector<double> exact = suites[si].exact(table);
      const std::uint64_t suite_seed =
          mix_seed(mix_seed(0x5eedu, suites[si].name), static_cast<std::uint64_t>(gi));
      std::vector<double> sum(kN, 0.0), sumsq(kN, 0.0);
      for (int d = 0; d < kDraws; ++d) {
        const std::vector<double> est =
            suites[si].draw(game, table, mix_seed(suite_seed, static_cast<std::uint64_t>(d)));
        for (int p = 0; p < kN; ++p) {
          sum[static_cast<std::size_t>(p)] += est[static_cast<std::size_t>(p)];
          sumsq[static_cast<std::size_t>(p)] +=
              est[static_cast<std::size_t>(p)] * est[static_cast<std::size_t>(p)];
        }
      }
      for (int p = 0; p < kN; ++p) {
        const double mean = sum[static_cast<std::size_t>(p)] / kDraws;
        const double var =
            (sumsq[static_cast<std::size_t>(p)] - kDraws * mean * mean) / (kDraws - 1);
        const double se = std::sqrt(std::max(var, 0.0) / kDraws);
        const double z = std::abs(mean - exact[static_cast<std::size_t>(p)]) /
                         std::max(se, 1e-300);
        if (z > worst_z) {
          worst_z = z;
          worst_suite = suites[si].name;
        }
        if (z > 3.0) ++exceed;
      }
    }
    if (exceed > 1) pass = false;
    worst_exceed = std::max(worst_exceed, exceed);
  }
  *detail = "5 estimators x 2 games x 8 coords, 20000 draws: worst |z| " + fmt(worst_z) + " (" +
            worst_suite + "), max exceedances per suite " + std::to_string(worst_exceed) +
            " (limit 1 per suite at 3se)";
  return pass;
}

// --- 4. bias detection -------------------------------------------------------

bool check_bias_detection(std::string* detail) {
  constexpr int kN = 8;
  constexpr int kContexts = 4;
  constexpr int kDraws = 200;
  std::vector<CooperativeGame> games;
  std::vector<std::vector<double>> exact_values;
  for (int c = 0; c < kContexts; ++c) {
    games.push_back(make_random_table_game(kN, 8800 + c));
    exact_values.push_back(exact_shapley(games.back()));
  }
  const ExactFn exact = [&exact_values](int c) {
    return exact_values[static_cast<std::size_t>(c)];
  };

  // 100 low-rate SGD iterations cost 2 + 100 * 2 = 202 evaluations; 22
  // permutations cost 22 * 9 = 198, the closest matching budget.
  const SgdShapleyConfig cfg;
  const DrawFn sgd_draw = [&games, &cfg](int c, std::uint64_t seed) {
    return sgd_shapley(games[static_cast<std::size_t>(c)], cfg, seed).label;
  };
  const DrawFn perm_draw = [&games](int c, std::uint64_t seed) {
    return permutation_sampling(games[static_cast<std::size_t>(c)], 22, seed).label;
  };
  const OracleStats sgd_stats = estimate_bias_noise(sgd_draw, exact, kContexts, kDraws, 0xb1a5);
  const OracleStats perm_stats = estimate_bias_noise(perm_draw, exact, kContexts, kDraws, 0xb1a6);

  *detail = "sgd flagged=" + std::string(sgd_stats.flagged_biased ? "yes" : "no") +
            " (bias_hat " + fmt(sgd_stats.bias_hat) + "), matched-budget permutation flagged=" +
            std::string(perm_stats.flagged_biased ? "yes" : "no") + " (bias_hat " +
            fmt(perm_stats.bias_hat) + ")";
  return sgd_stats.flagged_biased && !perm_stats.flagged_biased;
}

// --- 5. averaged-SGD convergence bound ---------------------------------------

bool check_sgd_convergence(std::string* detail) {
  bool bounds_hold = true;
  double slope = 0.0;
  double worst_margin = 0.0;  // largest excess/bound ratio seen
  for (const double sigma : {1.0, 0.0}) {
    SgdConvergenceConfig cfg;
    cfg.sigma = sigma;
    cfg.runs = 200;
    cfg.step_grid = {10, 100, 1000};
    cfg.base_seed = sigma > 0.0 ? 0xab01 : 0xab02;
    const std::vector<SgdConvergenceRow> rows = run_sgd_convergence_experiment(cfg);
    std::vector<double> xs, ys;
    for (const SgdConvergenceRow& row : rows) {
      if (row.empirical_excess > row.bound) bounds_hold = false;
      worst_margin = std::max(worst_margin, row.empirical_excess / row.bound);
      xs.push_back(static_cast<double>(row.steps));
      ys.push_back(row.empirical_excess);
    }
    // The 1/T decay rate is asserted on the noisy run; the noiseless excess
    // decays faster than 1/T, so only its bound is binding.
    if (sigma > 0.0) slope = fit_loglog_slope(xs, ys);
  }
  const bool slope_ok = slope >= -1.3 && slope <= -0.7;
  *detail = "excess <= bound at T in {10,100,1000} for sigma in {0,1} (worst ratio " +
            fmt(worst_margin) + "), noisy loglog slope " + fmt(slope) + " (limit -1 +- 0.3)";
  return bounds_hold && slope_ok;
}

// --- 6. loss sandwich --------------------------------------------------------

bool check_sandwich_acceptance(std::string* detail) {
  constexpr int kContexts = 80;
  constexpr int kDim = 3;
  constexpr int kDraws = 40;
  constexpr int kModels = 10;
  const double sigma = 1.0;
  const double offset = 0.5;

  std::vector<std::vector<double>> targets(kContexts);
  for (int c = 0; c < kContexts; ++c) {
    Rng rng(mix_seed(0x5a4d, static_cast<std::uint64_t>(c)));
    targets[static_cast<std::size_t>(c)].resize(kDim);
    for (double& t : targets[static_cast<std::size_t>(c)]) t = rng.gauss();
  }
  const ExactFn exact = [&targets](int c) { return targets[static_cast<std::size_t>(c)]; };
  const auto oracle = [&targets, sigma](double shift) {
    return [&targets, sigma, shift](int c, std::uint64_t seed) {
      Rng rng(seed);
      std::vector<double> out = targets[static_cast<std::size_t>(c)];
      for (double& v : out) v += shift + sigma * rng.gauss();
      return out;
    };
  };
  const OracleStats unbiased = estimate_bias_noise(oracle(0.0), exact, kContexts, kDraws, 0xc0de);
  const OracleStats biased = estimate_bias_noise(oracle(offset), exact, kContexts, kDraws, 0xc0df);

  int holds = 0;
  int total = 0;
  for (const OracleStats* stats : {&unbiased, &biased}) {
    for (int j = 0; j < kModels; ++j) {
      Rng rng(mix_seed(0xd00d, static_cast<std::uint64_t>(j)));
      const double scale = 0.3 * static_cast<double>(j);
      std::vector<std::vector<double>> preds = targets;
      for (std::vector<double>& p : preds) {
        for (double& v : p) v += scale * rng.gauss();
      }
      const SandwichReport rep = check_sandwich(preds, *stats, targets);
      ++total;
      if (rep.sandwich_holds) ++holds;
    }
  }
  *detail = "two-sided bound held for " + std::to_string(holds) + "/" + std::to_string(total) +
            " (zero-bias and constant-bias oracles x 10 models, 3se slack); unbiased flagged=" +
            (unbiased.flagged_biased ? "yes" : "no") + ", biased flagged=" +
            (biased.flagged_biased ? "yes" : "no");
  return holds == total && !unbiased.flagged_biased && biased.flagged_biased;
}

// --- 7. denoising ------------------------------------------------------------

bool check_denoising(std::string* detail) {
  constexpr int kIn = 10;
  constexpr int kOut = 5;
  constexpr int kTrain = 2000;
  constexpr int kHoldout = 500;
  const double sigma = 1.0;

  Rng truth_rng(0x7e57);
  std::vector<double> theta(static_cast<std::size_t>(kIn * kOut));
  for (double& v : theta) v = truth_rng.gauss() / std::sqrt(static_cast<double>(kIn));

  const auto make_split = [&](int count, std::uint64_t seed, std::vector<ContextRecord>* contexts,
                              std::vector<std::vector<double>>* clean,
                              std::vector<NoisyLabelRecord>* noisy) {
    for (int i = 0; i < count; ++i) {
      Rng rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
      ContextRecord ctx;
      ctx.id = "b-" + std::to_string(i);
      ctx.features.resize(kIn);
      for (double& x : ctx.features) x = rng.gauss();
      std::vector<double> y(kOut, 0.0);
      for (int o = 0; o < kOut; ++o) {
        for (int k = 0; k < kIn; ++k) {
          y[static_cast<std::size_t>(o)] +=
              theta[static_cast<std::size_t>(o * kIn + k)] * ctx.features[static_cast<std::size_t>(k)];
        }
      }
      NoisyLabelRecord rec;
      rec.context_id = ctx.id;
      rec.method = "gaussian";
      rec.label = y;
      for (double& v : rec.label) v += sigma * rng.gauss();
      contexts->push_back(std::move(ctx));
      if (clean) clean->push_back(std::move(y));
      noisy->push_back(std::move(rec));
    }
  };

  std::vector<ContextRecord> train_ctx;
  std::vector<NoisyLabelRecord> train_noisy;
  make_split(kTrain, 0x11a, &train_ctx, nullptr, &train_noisy);

  ModelConfig mc;
  mc.kind = ModelKind::kLinear;
  mc.input_dim = kIn;
  mc.output_dim = kOut;
  TrainConfig tc;
  tc.epochs = 80;
  tc.batch_size = 32;
  tc.learning_rate = 0.02;
  tc.val_fraction = 0.2;
  tc.seed = 0x11b;
  const TrainResult result = train_regression(train_ctx, train_noisy, mc, tc);

  std::vector<ContextRecord> hold_ctx;
  std::vector<std::vector<double>> hold_clean;
  std::vector<NoisyLabelRecord> hold_noisy;
  make_split(kHoldout, 0x11c, &hold_ctx, &hold_clean, &hold_noisy);

  std::vector<std::vector<double>> preds;
  std::vector<std::vector<double>> noisy_labels;
  for (int i = 0; i < kHoldout; ++i) {
    preds.push_back(result.model.predict(hold_ctx[static_cast<std::size_t>(i)].features));
    noisy_labels.push_back(hold_noisy[static_cast<std::size_t>(i)].label);
  }
  const double amortized_mse = compare(preds, hold_clean, CorrelationMode::kGlobal).mse;
  const double noisy_mse = compare(noisy_labels, hold_clean, CorrelationMode::kGlobal).mse;
  *detail = "held-out mse to truth: amortized " + fmt(amortized_mse) + " vs noisy labels " +
            fmt(noisy_mse) + " (limit 0.1x)";
  return amortized_mse <= 0.1 * noisy_mse;
}

// --- 8. data-valuation surrogate ---------------------------------------------

// 200-point retraining game with planted label flips. Reference scores are
// converged Monte Carlo (2000 draws per point, disjoint seed stream):
// enumeration is out of reach at this size and an unbiased mean over 2000
// draws is accurate to ~1% of the score scale.
bool check_valuation_surrogate(std::string* detail) {
  constexpr int kPoints = 200;
  constexpr int kDim = 5;
  constexpr int kSeeds = 5;
  const std::vector<std::uint64_t> ks = {5, 20, 50};

  const SemivalueWeights weights = shapley_weights(kPoints);
  std::vector<double> mc5_pearson, mc5_auroc;
  std::vector<std::vector<double>> am_pearson(ks.size()), am_auroc(ks.size());

  for (int s = 0; s < kSeeds; ++s) {
    const Dataset train = make_blobs(kPoints, kDim, 1.0, 0.2, 1000 + static_cast<std::uint64_t>(s));
    const Dataset holdout = make_blobs(100, kDim, 1.0, 0.0, 2000 + static_cast<std::uint64_t>(s));
    RetrainConfig rc;
    rc.learner = LearnerKind::kRidge;
    const auto valuer = std::make_shared<RetrainValuer>(train, holdout, rc);
    const CooperativeGame game = make_valuation_game(valuer);
    const std::uint64_t seed_base = mix_seed(0xfa11, static_cast<std::uint64_t>(s));

    const auto mc_scores = [&](std::uint64_t k, std::uint64_t stream) {
      SamplingPlan plan;
      plan.num_samples = k;
      std::vector<double> scores(kPoints);
      for (int i = 0; i < kPoints; ++i) {
        scores[static_cast<std::size_t>(i)] =
            mc_semivalue(game, i, weights, plan, mix_seed(stream, static_cast<std::uint64_t>(i)))
                .label[0];
      }
      return scores;
    };
    const std::vector<double> reference = mc_scores(2000, mix_seed(seed_base, "reference"));

    std::vector<bool> flips;
    for (int i = 0; i < kPoints; ++i) flips.push_back(train.flipped[static_cast<std::size_t>(i)] != 0);

    std::vector<ContextRecord> contexts;
    for (int i = 0; i < kPoints; ++i) {
      ContextRecord ctx;
      ctx.id = "point-" + std::to_string(i);
      const LabeledPoint p = train.point(i);
      ctx.features = p.x;
      ctx.features.push_back(p.y);
      contexts.push_back(std::move(ctx));
    }

    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
      const std::vector<double> noisy =
          mc_scores(ks[ki], mix_seed(seed_base, 10 + static_cast<std::uint64_t>(ki)));
      if (ks[ki] == 5) {
        mc5_pearson.push_back(pearson_correlation(noisy, reference).value_or(0.0));
        mc5_auroc.push_back(auroc_mislabeled(noisy, flips));
      }

      std::vector<NoisyLabelRecord> records;
      for (int i = 0; i < kPoints; ++i) {
        NoisyLabelRecord rec;
        rec.context_id = contexts[static_cast<std::size_t>(i)].id;
        rec.method = "mc_semivalue";
        rec.label = {noisy[static_cast<std::size_t>(i)]};
        records.push_back(std::move(rec));
      }
      ModelConfig mc;
      mc.kind = ModelKind::kMlp;
      mc.input_dim = kDim + 1;
      mc.output_dim = 1;
      mc.hidden = 32;
      TrainConfig tc;
      tc.epochs = 150;
      tc.batch_size = 16;
      tc.learning_rate = 0.01;
      tc.val_fraction = 0.2;
      tc.seed = mix_seed(seed_base, 20 + static_cast<std::uint64_t>(ki));
      tc.preprocess = PreprocessMode::kGlobalStdRescale;
      const TrainResult result = train_regression(contexts, records, mc, tc);
      std::vector<double> preds(kPoints);
      for (int i = 0; i < kPoints; ++i) {
        preds[static_cast<std::size_t>(i)] =
            result.model.predict(contexts[static_cast<std::size_t>(i)].features)[0];
      }
      am_pearson[ki].push_back(pearson_correlation(preds, reference).value_or(0.0));
      am_auroc[ki].push_back(auroc_mislabeled(preds, flips));
    }
  }

  const double mc5_p = median(mc5_pearson);
  const double mc5_a = median(mc5_auroc);
  bool pass = true;
  std::ostringstream oss;
  oss << "median over 5 seeds: mc@5 pearson " << fmt(mc5_p) << " auroc " << fmt(mc5_a);
  for (std::size_t ki = 0; ki < ks.size(); ++ki) {
    const double p = median(am_pearson[ki]);
    const double a = median(am_auroc[ki]);
    oss << "; amortized@" << ks[ki] << " pearson " << fmt(p) << " auroc " << fmt(a);
    if (p < mc5_p || a < mc5_a) pass = false;
  }
  oss << " (limit: amortized >= mc@5 on both)";
  *detail = oss.str();
  return pass;
}

// --- 9. determinism ----------------------------------------------------------

bool check_determinism(std::string* detail) {
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / "semval_acceptance_det";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto slot = [&dir](const char* name) { return (dir / name).string(); };
  bool pass = true;
  std::string first_diff;
  const auto expect_same = [&](const std::string& a, const std::string& b, const char* what) {
    if (read_text_file(a) != read_text_file(b)) {
      pass = false;
      if (first_diff.empty()) first_diff = what;
    }
  };

  // Label stage: same batch generated with 1 and 4 workers, serialized twice.
  std::vector<ContextRecord> contexts;
  std::vector<CooperativeGame> games;
  for (int c = 0; c < 24; ++c) {
    games.push_back(make_random_table_game(6, 6600 + c));
    ContextRecord ctx;
    ctx.id = "g-" + std::to_string(c);
    ctx.features = {static_cast<double>(c), 1.0};
    contexts.push_back(std::move(ctx));
  }
  const ContextOracle oracle = [&games](int c, std::uint64_t seed) {
    return permutation_sampling(games[static_cast<std::size_t>(c)], 4, seed);
  };
  for (int pass_idx = 0; pass_idx < 2; ++pass_idx) {
    for (const int workers : {1, 4}) {
      LabelFile file;
      file.task = "table";
      file.method = "permutation";
      file.game_fingerprint = "det";
      file.base_seed = 42;
      file.label_dim = 6;
      file.records = build_label_dataset(contexts, oracle, 42, workers);
      save_label_file(slot(("labels_" + std::to_string(pass_idx) + "_" +
                            std::to_string(workers) + ".jsonl").c_str()),
                      file);
    }
  }
  expect_same(slot("labels_0_1.jsonl"), slot("labels_0_4.jsonl"), "labels workers 1 vs 4");
  expect_same(slot("labels_0_1.jsonl"), slot("labels_1_1.jsonl"), "labels rerun");

  // Train stage: same labels, trained twice, checkpointed twice.
  const LabelFile labels = load_label_file(slot("labels_0_1.jsonl"));
  ModelConfig mc;
  mc.input_dim = 2;
  mc.output_dim = 6;
  TrainConfig tc;
  tc.epochs = 20;
  tc.batch_size = 4;
  tc.seed = 99;
  for (int pass_idx = 0; pass_idx < 2; ++pass_idx) {
    const TrainResult result = train_regression(contexts, labels.records, mc, tc);
    Checkpoint ckpt;
    ckpt.model = result.model;
    ckpt.meta["stage"] = "determinism";
    save_checkpoint(slot(("ckpt_" + std::to_string(pass_idx) + ".json").c_str()), ckpt);

    // Report stage: metrics of this model against the labels, written as CSV.
    std::vector<std::vector<double>> preds, truth;
    for (std::size_t i = 0; i < contexts.size(); ++i) {
      preds.push_back(result.model.predict(contexts[i].features));
      truth.push_back(labels.records[i].label);
    }
    const MetricReport rep = compare(preds, truth, CorrelationMode::kGlobal);
    write_csv(slot(("metrics_" + std::to_string(pass_idx) + ".csv").c_str()),
              {"mse", "pearson"},
              {{format_double(rep.mse), format_double(rep.pearson.value_or(0.0))}});
  }
  expect_same(slot("ckpt_0.json"), slot("ckpt_1.json"), "checkpoint rerun");
  expect_same(slot("metrics_0.csv"), slot("metrics_1.csv"), "metrics rerun");

  // Verification stage: worker count must not leak into any statistic.
  std::vector<std::vector<double>> targets(30);
  for (int c = 0; c < 30; ++c) {
    Rng rng(mix_seed(0xde7, static_cast<std::uint64_t>(c)));
    targets[static_cast<std::size_t>(c)] = {rng.gauss(), rng.gauss()};
  }
  const ExactFn exact = [&targets](int c) { return targets[static_cast<std::size_t>(c)]; };
  const DrawFn noisy = [&targets](int c, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> out = targets[static_cast<std::size_t>(c)];
    for (double& v : out) v += rng.gauss();
    return out;
  };
  const OracleStats w1 = estimate_bias_noise(noisy, exact, 30, 10, 0xe1, 1);
  const OracleStats w4 = estimate_bias_noise(noisy, exact, 30, 10, 0xe1, 4);
  if (w1.bias_hat != w4.bias_hat || w1.noise_hat != w4.noise_hat ||
      w1.bias_signed != w4.bias_signed) {
    pass = false;
    if (first_diff.empty()) first_diff = "bias/noise estimate workers 1 vs 4";
  }
  SgdConvergenceConfig sgd_cfg;
  sgd_cfg.runs = 12;
  sgd_cfg.step_grid = {10, 50};
  sgd_cfg.base_seed = 0xe2;
  sgd_cfg.workers = 1;
  const std::vector<SgdConvergenceRow> r1 = run_sgd_convergence_experiment(sgd_cfg);
  sgd_cfg.workers = 4;
  const std::vector<SgdConvergenceRow> r4 = run_sgd_convergence_experiment(sgd_cfg);
  for (std::size_t i = 0; i < r1.size(); ++i) {
    if (r1[i].empirical_excess != r4[i].empirical_excess || r1[i].excess_se != r4[i].excess_se) {
      pass = false;
      if (first_diff.empty()) first_diff = "sgd experiment workers 1 vs 4";
    }
  }

  std::filesystem::remove_all(dir);
  *detail = pass ? "labels, checkpoints, reports, and statistics byte-identical across reruns "
                   "and workers {1,4}"
                 : "first difference: " + first_diff;
  return pass;
}

}  // namespace

int main() {
  std::printf("acceptance gate\n");
  timed("exact-oracle-axioms", check_axioms);
  timed("datamodels-equivalence", check_datamodels_equivalence);
  timed("estimator-unbiasedness", check_unbiasedness);
  timed("bias-detection", check_bias_detection);
  timed("sgd-convergence-bound", check_sgd_convergence);
  timed("loss-sandwich", check_sandwich_acceptance);
  timed("denoising", check_denoising);
  timed("valuation-surrogate", check_valuation_surrogate);
  timed("determinism", check_determinism);
  std::printf("%d of 9 checks failed\n", g_failures);
  return g_failures;
}
