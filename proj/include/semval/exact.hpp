#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "semval/game.hpp"

namespace semval {

// All 2^n coalition values of a game, indexed by bit mask. Enumerating once
// and sharing the table is what keeps multi-oracle cross-checks affordable.
struct ValueTable {
  int n = 0;
  std::vector<double> v;

  double at(std::uint32_t mask) const { return v[mask]; }
};

inline constexpr int kMaxExactPlayers = 20;

// Evaluates every coalition. Throws ResourceLimitError above kMaxExactPlayers.
ValueTable enumerate_game(const CooperativeGame& game);

// Per-cardinality semivalue weights w[k] for k = 0..n-1, applied to marginal
// contributions v(T+i) - v(T) with |T| = k. Valid weights are nonnegative and
// satisfy sum_k C(n-1, k) w[k] = 1.
struct SemivalueWeights {
  int n = 0;
  std::vector<double> w;
};

SemivalueWeights shapley_weights(int n);
SemivalueWeights banzhaf_weights(int n);
// Bernoulli(q) inclusion law: w[k] = q^k (1-q)^(n-1-k).
SemivalueWeights datamodels_weights(int n, double q);
// Throws InvalidArgument unless nonnegative and normalized to 1e-9.
void validate_semivalue_weights(const SemivalueWeights& weights);

std::vector<double> exact_semivalue(const ValueTable& table, const SemivalueWeights& weights);
std::vector<double> exact_shapley(const ValueTable& table);
std::vector<double> exact_banzhaf(const ValueTable& table);

std::vector<double> exact_semivalue(const CooperativeGame& game, const SemivalueWeights& weights);
std::vector<double> exact_shapley(const CooperativeGame& game);
std::vector<double> exact_banzhaf(const CooperativeGame& game);

// Weighting scheme for least-squares attribution. `weight` must be finite and
// nonnegative on every coalition; kernels whose natural weight diverges at the
// empty and grand coalitions return 0 there and set `constrained`, which pins
// the intercept to v(empty) and the coefficient sum to v(full) - v(empty).
struct LSKernel {
  std::string name;
  bool constrained = false;
  std::function<double(const Coalition&)> weight;
};

LSKernel shapley_ls_kernel(int n);
LSKernel lime_ls_kernel(int n, double width);
// Bernoulli(q) subset probabilities as weights; unconstrained.
LSKernel bernoulli_ls_kernel(int n, double q);

struct WeightedLSSolution {
  std::vector<double> coeffs;
  double intercept = 0.0;
};

// Minimizes sum_S weight(S) (v(S) - intercept - sum_{i in S} coeffs_i)^2 over
// all 2^n coalitions (constrained kernels: over the proper coalitions, with
// the two equality constraints eliminating the intercept and one coefficient).
// Singular normal equations get one 1e-9 ridge retry, then NumericalError.
WeightedLSSolution exact_weighted_ls(const ValueTable& table, const LSKernel& kernel);
WeightedLSSolution exact_weighted_ls(const CooperativeGame& game, const LSKernel& kernel);

// Leave-one-out scores under Bernoulli(q) subsampling, computed two ways: the
// marginal-contribution sum with weights q^k (1-q)^(n-1-k), and the
// Bernoulli-weighted regression coefficients. Both routes must agree to 1e-9
// (NumericalError otherwise); the marginal-sum values are returned.
std::vector<double> exact_datamodels(const ValueTable& table, double q);
std::vector<double> exact_datamodels(const CooperativeGame& game, double q);

enum class SubsetLaw { kBernoulli, kFixedSize };

// Same scores via the single-pass reweighting c_i(T) built from the inclusion
// moments p1 = P(i in T), p2 = P(i,j in T), p3 = P(i in T, j not in T).
// Supports Bernoulli(q) and fixed-size(k) laws; p3 = 0 is invalid-argument.
std::vector<double> exact_datamodels_symmetric(const ValueTable& table, SubsetLaw law,
                                               double param);
std::vector<double> exact_datamodels_symmetric(const CooperativeGame& game, SubsetLaw law,
                                               double param);

}  // namespace semval
