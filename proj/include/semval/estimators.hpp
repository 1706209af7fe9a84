#pragma once

#include <cstdint>
#include <vector>

#include "semval/exact.hpp"
#include "semval/game.hpp"
#include "semval/record.hpp"
#include "semval/retrain.hpp"

namespace semval {

// Monte Carlo label generators. Each call is a pure function of
// (game, parameters, seed): rerunning reproduces the label bit-identically.
// evals_used counts game evaluations (fits for the distributional estimator).

// Mean marginal contribution over k uniform permutations, evaluated
// incrementally along each permutation prefix: k * (n + 1) evaluations.
// Unbiased for Shapley values.
NoisyLabelRecord permutation_sampling(const CooperativeGame& game, std::uint64_t k,
                                      std::uint64_t seed);

// Constrained weighted least squares on k subsets drawn from the Shapley
// kernel distribution (card law proportional to 1/(s(n-s)), then a uniform
// subset of that size). The efficiency constraint consumes v(empty) and
// v(full), so the analytic cost is k + 2 evaluations. Asymptotically unbiased.
NoisyLabelRecord kernelshap(const CooperativeGame& game, std::uint64_t k, std::uint64_t seed);

struct SgdShapleyConfig {
  std::uint64_t iterations = 100;
  double learning_rate = 5e-4;
  int minibatch = 2;      // subsets per gradient; >= 2
  bool paired = true;     // draw complement pairs
};

// Projected SGD on the Shapley least-squares objective: intercept pinned to
// v(empty), iterates projected onto the efficiency hyperplane, uniform average
// over iterates returned. Biased at finite iteration counts; the record says
// so. Cost: 2 + iterations * minibatch evaluations.
NoisyLabelRecord sgd_shapley(const CooperativeGame& game, const SgdShapleyConfig& cfg,
                             std::uint64_t seed);

// Maximum-sample-reuse Banzhaf: k uniform subsets; per player, mean value of
// subsets containing it minus mean value of subsets excluding it. A player
// with an empty stratum gets NaN and the record is flagged partial. Unbiased
// given both strata are non-empty. Cost: k evaluations.
NoisyLabelRecord msr_banzhaf(const CooperativeGame& game, std::uint64_t k, std::uint64_t seed);

// Deterministic core of msr_banzhaf operating on caller-provided subsets.
NoisyLabelRecord msr_banzhaf_from_subsets(const CooperativeGame& game,
                                          const std::vector<Coalition>& subsets);

// Weighted least squares over k uniformly drawn subsets with proximity weights
// exp(-(1 - |S|/n)^2 / width^2); intercept fitted then discarded. Cost: k.
NoisyLabelRecord lime_ls(const CooperativeGame& game, std::uint64_t k, double kernel_width,
                         std::uint64_t seed);

struct SamplingPlan {
  std::uint64_t num_samples = 0;
  int min_cardinality = 0;
  int max_cardinality = -1;  // -1: largest admissible size
  bool with_replacement = true;
  bool paired = false;
};

// Monte Carlo semivalue for one player: cardinality drawn proportional to
// C(n-1, c) w(c) restricted to [min, max] cardinality, then a uniform subset
// of the other players. Unbiased when the cardinality law is unrestricted;
// restricting it sets the biased flag. Cost: 2k evaluations.
NoisyLabelRecord mc_semivalue(const CooperativeGame& game, int player,
                              const SemivalueWeights& weights, const SamplingPlan& plan,
                              std::uint64_t seed);

// Monte Carlo distributional value of one (possibly external) point: datasets
// of uniform cardinality in [min, max] drawn from the valuer's training pool
// (with replacement by default), scored with and without the point. Cost: 2k
// fits.
NoisyLabelRecord mc_distributional(const RetrainValuer& valuer, const LabeledPoint& point,
                                   const SamplingPlan& plan, std::uint64_t seed);

// Monte Carlo leave-one-out score under Bernoulli(q) inclusion: subsets of all
// n players, averaged v(T + i) - v(T - i). Unbiased. Cost: 2k evaluations.
NoisyLabelRecord mc_datamodels(const CooperativeGame& game, int player, double q,
                               std::uint64_t k, std::uint64_t seed);

}  // namespace semval
