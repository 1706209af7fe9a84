#include "semval/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "semval/errors.hpp"
#include "semval/linalg.hpp"
#include "semval/math_util.hpp"
#include "semval/rng.hpp"

namespace semval {

namespace {

void check_finite_label(const NoisyLabelRecord& rec) {
  for (double v : rec.label) {
    if (!std::isnan(v) && !std::isfinite(v)) {
      throw NumericalError(rec.method + ": non-finite label entry");
    }
  }
}

// First s entries of a Fisher-Yates pass over `pool`; uniform s-subsets.
void draw_subset_into(Rng& rng, std::vector<int>& pool, int s) {
  const int n = static_cast<int>(pool.size());
  for (int j = 0; j < s; ++j) {
    const int pick = j + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n - j)));
    std::swap(pool[static_cast<std::size_t>(j)], pool[static_cast<std::size_t>(pick)]);
  }
}

// Cardinality law of the Shapley least-squares kernel: P(s) proportional to
// 1/(s(n-s)) on 1..n-1 (the C(n,s) subset count cancels the kernel's).
std::vector<double> shapley_kernel_size_cdf(int n) {
  std::vector<double> cdf(static_cast<std::size_t>(n - 1));
  double total = 0.0;
  for (int s = 1; s < n; ++s) {
    total += 1.0 / (static_cast<double>(s) * (n - s));
    cdf[static_cast<std::size_t>(s - 1)] = total;
  }
  for (double& c : cdf) c /= total;
  cdf.back() = 1.0;
  return cdf;
}

int draw_from_cdf(Rng& rng, const std::vector<double>& cdf) {
  const double u = rng.uniform();
  for (std::size_t i = 0; i < cdf.size(); ++i) {
    if (u < cdf[i]) return static_cast<int>(i);
  }
  return static_cast<int>(cdf.size()) - 1;
}

Coalition coalition_from_members(int n, const int* members, int count) {
  Coalition c(n);
  for (int j = 0; j < count; ++j) c.add(members[j]);
  return c;
}

// Solves the efficiency-constrained Shapley least-squares system on sampled
// subsets (each row weight `weights[j]`, or 1 when weights is empty). Same
// elimination as the exact constrained solver.
std::vector<double> solve_constrained_rows(int n, const std::vector<Coalition>& subsets,
                                           const std::vector<double>& values,
                                           const std::vector<double>& weights, double v0,
                                           double delta) {
  const int p = n - 1;
  std::vector<double> normal(static_cast<std::size_t>(p) * p, 0.0);
  std::vector<double> rhs(static_cast<std::size_t>(p), 0.0);
  std::vector<double> row(static_cast<std::size_t>(p));
  for (std::size_t j = 0; j < subsets.size(); ++j) {
    const Coalition& s = subsets[j];
    const double w = weights.empty() ? 1.0 : weights[j];
    if (w <= 0.0) continue;
    const double last = s.contains(n - 1) ? 1.0 : 0.0;
    for (int i = 0; i < p; ++i) {
      row[static_cast<std::size_t>(i)] = (s.contains(i) ? 1.0 : 0.0) - last;
    }
    const double target = (values[j] - v0) - last * delta;
    for (int a = 0; a < p; ++a) {
      const double ra = row[static_cast<std::size_t>(a)];
      if (ra == 0.0) continue;
      rhs[static_cast<std::size_t>(a)] += w * target * ra;
      for (int b = 0; b < p; ++b) {
        normal[static_cast<std::size_t>(a) * p + b] += w * ra * row[static_cast<std::size_t>(b)];
      }
    }
  }
  const std::vector<double> sol = solve_spd_with_ridge_fallback(normal, rhs, p);
  std::vector<double> coeffs(sol.begin(), sol.end());
  double used = 0.0;
  for (double c : coeffs) used += c;
  coeffs.push_back(delta - used);
  return coeffs;
}

}  // namespace

NoisyLabelRecord permutation_sampling(const CooperativeGame& game, std::uint64_t k,
                                      std::uint64_t seed) {
  if (k < 1) throw InvalidArgument("permutation_sampling: k must be >= 1");
  const int n = game.num_players();
  Rng rng(seed);
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::vector<double> acc(static_cast<std::size_t>(n), 0.0);
  for (std::uint64_t rep = 0; rep < k; ++rep) {
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    rng.shuffle(perm.data(), perm.size());
    Coalition prefix(n);
    double prev = game.value(prefix);
    for (int pos = 0; pos < n; ++pos) {
      prefix.add(perm[static_cast<std::size_t>(pos)]);
      const double cur = game.value(prefix);
      acc[static_cast<std::size_t>(perm[static_cast<std::size_t>(pos)])] += cur - prev;
      prev = cur;
    }
  }
  NoisyLabelRecord rec;
  rec.method = "permutation";
  rec.num_samples = k;
  rec.seed = seed;
  rec.label.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) rec.label[static_cast<std::size_t>(i)] = acc[static_cast<std::size_t>(i)] / static_cast<double>(k);
  rec.evals_used = k * static_cast<std::uint64_t>(n + 1);
  check_finite_label(rec);
  return rec;
}

NoisyLabelRecord kernelshap(const CooperativeGame& game, std::uint64_t k, std::uint64_t seed) {
  const int n = game.num_players();
  if (n < 2) throw InvalidArgument("kernelshap: needs at least 2 players");
  if (n > 64) throw InvalidArgument("kernelshap: limited to 64 players");
  if (k < static_cast<std::uint64_t>(n) + 2) {
    throw InvalidArgument("kernelshap: k must be at least n + 2");
  }
  Rng rng(seed);
  const std::vector<double> cdf = shapley_kernel_size_cdf(n);
  std::vector<int> pool(static_cast<std::size_t>(n));
  std::vector<Coalition> subsets;
  std::vector<double> values;
  subsets.reserve(k);
  values.reserve(k);
  std::vector<std::uint64_t> seen;
  for (std::uint64_t j = 0; j < k; ++j) {
    const int s = draw_from_cdf(rng, cdf) + 1;
    for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
    draw_subset_into(rng, pool, s);
    Coalition c = coalition_from_members(n, pool.data(), s);
    seen.push_back(c.mask());
    values.push_back(game.value(c));
    subsets.push_back(std::move(c));
  }
  std::sort(seen.begin(), seen.end());
  const std::uint64_t distinct =
      static_cast<std::uint64_t>(std::unique(seen.begin(), seen.end()) - seen.begin());
  const std::uint64_t needed =
      std::min<std::uint64_t>(static_cast<std::uint64_t>(n) + 2,
                              (std::uint64_t{1} << n) - 2);
  if (distinct < needed) {
    throw NumericalError("kernelshap: only " + std::to_string(distinct) +
                         " distinct subsets sampled; need " + std::to_string(needed));
  }
  const double v0 = game.value(Coalition(n));
  const double vfull = game.value(Coalition(n).complement());
  NoisyLabelRecord rec;
  rec.method = "kernelshap";
  rec.num_samples = k;
  rec.seed = seed;
  rec.label = solve_constrained_rows(n, subsets, values, {}, v0, vfull - v0);
  rec.evals_used = k + 2;
  check_finite_label(rec);
  return rec;
}

NoisyLabelRecord sgd_shapley(const CooperativeGame& game, const SgdShapleyConfig& cfg,
                             std::uint64_t seed) {
  const int n = game.num_players();
  if (n < 2) throw InvalidArgument("sgd_shapley: needs at least 2 players");
  if (cfg.iterations < 1) throw InvalidArgument("sgd_shapley: iterations must be >= 1");
  if (cfg.minibatch < 2) throw InvalidArgument("sgd_shapley: minibatch must be >= 2");
  if (cfg.paired && cfg.minibatch % 2 != 0) {
    throw InvalidArgument("sgd_shapley: paired sampling needs an even minibatch");
  }
  if (!(cfg.learning_rate > 0.0)) throw InvalidArgument("sgd_shapley: learning rate must be positive");

  Rng rng(seed);
  const std::vector<double> cdf = shapley_kernel_size_cdf(n);
  const double v0 = game.value(Coalition(n));
  const double vfull = game.value(Coalition(n).complement());
  const double delta = vfull - v0;

  std::vector<double> a(static_cast<std::size_t>(n), delta / n);
  std::vector<double> avg(static_cast<std::size_t>(n), 0.0);
  std::vector<double> grad(static_cast<std::size_t>(n));
  std::vector<int> pool(static_cast<std::size_t>(n));
  const int draws_per_step = cfg.paired ? cfg.minibatch / 2 : cfg.minibatch;

  for (std::uint64_t t = 0; t < cfg.iterations; ++t) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (int b = 0; b < draws_per_step; ++b) {
      const int s = draw_from_cdf(rng, cdf) + 1;
      for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
      draw_subset_into(rng, pool, s);
      Coalition c = coalition_from_members(n, pool.data(), s);
      for (int rep = 0; rep < (cfg.paired ? 2 : 1); ++rep) {
        if (rep == 1) c = c.complement();
        double inner = 0.0;
        for (int i : c.members()) inner += a[static_cast<std::size_t>(i)];
        const double resid = game.value(c) - v0 - inner;
        for (int i : c.members()) grad[static_cast<std::size_t>(i)] += -2.0 * resid;
      }
    }
    const double scale = cfg.learning_rate / cfg.minibatch;
    for (int i = 0; i < n; ++i) a[static_cast<std::size_t>(i)] -= scale * grad[static_cast<std::size_t>(i)];
    // Project onto the efficiency hyperplane sum(a) = delta.
    double excess = 0.0;
    for (double ai : a) excess += ai;
    excess = (excess - delta) / n;
    for (double& ai : a) ai -= excess;
    for (double ai : a) {
      if (!std::isfinite(ai)) throw NumericalError("sgd_shapley: iterate diverged");
    }
    for (int i = 0; i < n; ++i) avg[static_cast<std::size_t>(i)] += a[static_cast<std::size_t>(i)];
  }

  NoisyLabelRecord rec;
  rec.method = "sgd_shapley";
  rec.num_samples = cfg.iterations;
  rec.seed = seed;
  rec.label = std::move(avg);
  for (double& v : rec.label) v /= static_cast<double>(cfg.iterations);
  rec.evals_used = 2 + cfg.iterations * static_cast<std::uint64_t>(cfg.minibatch);
  rec.biased = true;
  check_finite_label(rec);
  return rec;
}

NoisyLabelRecord msr_banzhaf_from_subsets(const CooperativeGame& game,
                                          const std::vector<Coalition>& subsets) {
  const int n = game.num_players();
  if (subsets.size() < 2) throw InvalidArgument("msr_banzhaf: needs at least 2 subsets");
  std::vector<double> sum_in(static_cast<std::size_t>(n), 0.0);
  std::vector<double> sum_out(static_cast<std::size_t>(n), 0.0);
  std::vector<std::uint64_t> cnt_in(static_cast<std::size_t>(n), 0);
  for (const Coalition& s : subsets) {
    const double v = game.value(s);
    for (int i = 0; i < n; ++i) {
      if (s.contains(i)) {
        sum_in[static_cast<std::size_t>(i)] += v;
        ++cnt_in[static_cast<std::size_t>(i)];
      } else {
        sum_out[static_cast<std::size_t>(i)] += v;
      }
    }
  }
  NoisyLabelRecord rec;
  rec.method = "msr_banzhaf";
  rec.num_samples = subsets.size();
  rec.evals_used = subsets.size();
  rec.label.resize(static_cast<std::size_t>(n));
  const std::uint64_t k = subsets.size();
  for (int i = 0; i < n; ++i) {
    const std::uint64_t in = cnt_in[static_cast<std::size_t>(i)];
    if (in == 0 || in == k) {
      rec.label[static_cast<std::size_t>(i)] = std::nan("");
      rec.partial = true;
    } else {
      rec.label[static_cast<std::size_t>(i)] =
          sum_in[static_cast<std::size_t>(i)] / static_cast<double>(in) -
          sum_out[static_cast<std::size_t>(i)] / static_cast<double>(k - in);
    }
  }
  check_finite_label(rec);
  return rec;
}

NoisyLabelRecord msr_banzhaf(const CooperativeGame& game, std::uint64_t k, std::uint64_t seed) {
  if (k < 2) throw InvalidArgument("msr_banzhaf: k must be >= 2");
  const int n = game.num_players();
  Rng rng(seed);
  std::vector<Coalition> subsets;
  subsets.reserve(k);
  for (std::uint64_t j = 0; j < k; ++j) {
    Coalition c(n);
    for (int i = 0; i < n; ++i) {
      if (rng.bernoulli(0.5)) c.add(i);
    }
    subsets.push_back(std::move(c));
  }
  NoisyLabelRecord rec = msr_banzhaf_from_subsets(game, subsets);
  rec.seed = seed;
  return rec;
}

NoisyLabelRecord lime_ls(const CooperativeGame& game, std::uint64_t k, double kernel_width,
                         std::uint64_t seed) {
  const int n = game.num_players();
  if (kernel_width <= 0.0) throw InvalidArgument("lime_ls: kernel width must be positive");
  if (k < static_cast<std::uint64_t>(n) + 2) {
    throw InvalidArgument("lime_ls: k must be at least n + 2");
  }
  Rng rng(seed);
  const int p = n + 1;
  std::vector<double> normal(static_cast<std::size_t>(p) * p, 0.0);
  std::vector<double> rhs(static_cast<std::size_t>(p), 0.0);
  std::vector<int> support(static_cast<std::size_t>(p));
  for (std::uint64_t j = 0; j < k; ++j) {
    Coalition c(n);
    for (int i = 0; i < n; ++i) {
      if (rng.bernoulli(0.5)) c.add(i);
    }
    const double gap = 1.0 - static_cast<double>(c.size()) / n;
    const double w = std::exp(-(gap * gap) / (kernel_width * kernel_width));
    const double v = game.value(c);
    int cnt = 0;
    support[static_cast<std::size_t>(cnt++)] = 0;
    for (int i : c.members()) support[static_cast<std::size_t>(cnt++)] = i + 1;
    const double wv = w * v;
    for (int a = 0; a < cnt; ++a) {
      const int ia = support[static_cast<std::size_t>(a)];
      rhs[static_cast<std::size_t>(ia)] += wv;
      for (int b = 0; b < cnt; ++b) {
        normal[static_cast<std::size_t>(ia) * p + support[static_cast<std::size_t>(b)]] += w;
      }
    }
  }
  const std::vector<double> sol = solve_spd_with_ridge_fallback(normal, rhs, p);
  NoisyLabelRecord rec;
  rec.method = "lime";
  rec.num_samples = k;
  rec.seed = seed;
  rec.label.assign(sol.begin() + 1, sol.end());
  rec.evals_used = k;
  check_finite_label(rec);
  return rec;
}

NoisyLabelRecord mc_semivalue(const CooperativeGame& game, int player,
                              const SemivalueWeights& weights, const SamplingPlan& plan,
                              std::uint64_t seed) {
  const int n = game.num_players();
  if (player < 0 || player >= n) throw InvalidArgument("mc_semivalue: player out of range");
  if (weights.n != n) throw InvalidArgument("mc_semivalue: weight/game size mismatch");
  validate_semivalue_weights(weights);
  if (plan.num_samples < 1) throw InvalidArgument("mc_semivalue: num_samples must be >= 1");
  const int max_card = plan.max_cardinality < 0 ? n - 1 : plan.max_cardinality;
  if (plan.min_cardinality < 0 || plan.min_cardinality > max_card || max_card > n - 1) {
    throw InvalidArgument("mc_semivalue: cardinality bounds must satisfy 0 <= min <= max <= n-1");
  }

  // Cardinality law: P(c) proportional to C(n-1, c) w(c), restricted to the
  // plan's window. Restricting the window changes the estimand, hence biased.
  std::vector<double> cdf(static_cast<std::size_t>(max_card - plan.min_cardinality + 1));
  double total = 0.0;
  for (int c = plan.min_cardinality; c <= max_card; ++c) {
    total += binom(n - 1, c) * weights.w[static_cast<std::size_t>(c)];
    cdf[static_cast<std::size_t>(c - plan.min_cardinality)] = total;
  }
  if (!(total > 0.0)) {
    throw InvalidArgument("mc_semivalue: cardinality law has zero mass in the allowed window");
  }
  for (double& c : cdf) c /= total;
  cdf.back() = 1.0;
  const bool restricted = plan.min_cardinality > 0 || max_card < n - 1;

  Rng rng(seed);
  std::vector<int> others;
  others.reserve(static_cast<std::size_t>(n) - 1);
  for (int i = 0; i < n; ++i) {
    if (i != player) others.push_back(i);
  }
  std::vector<int> pool;
  double acc = 0.0;
  for (std::uint64_t j = 0; j < plan.num_samples; ++j) {
    const int c = plan.min_cardinality + draw_from_cdf(rng, cdf);
    pool = others;
    draw_subset_into(rng, pool, c);
    Coalition t = coalition_from_members(n, pool.data(), c);
    const double without = game.value(t);
    t.add(player);
    const double with = game.value(t);
    acc += with - without;
  }

  NoisyLabelRecord rec;
  rec.method = "mc_semivalue";
  rec.num_samples = plan.num_samples;
  rec.seed = seed;
  rec.label.assign(1, acc / static_cast<double>(plan.num_samples));
  rec.evals_used = 2 * plan.num_samples;
  rec.biased = restricted;
  check_finite_label(rec);
  return rec;
}

NoisyLabelRecord mc_distributional(const RetrainValuer& valuer, const LabeledPoint& point,
                                   const SamplingPlan& plan, std::uint64_t seed) {
  const int n = valuer.num_points();
  if (plan.num_samples < 1) throw InvalidArgument("mc_distributional: num_samples must be >= 1");
  const int max_card = plan.max_cardinality < 0 ? n : plan.max_cardinality;
  if (plan.min_cardinality < 0 || plan.min_cardinality > max_card) {
    throw InvalidArgument("mc_distributional: cardinality bounds must satisfy 0 <= min <= max");
  }
  if (!plan.with_replacement && max_card > n) {
    throw InvalidArgument("mc_distributional: without replacement, max cardinality is the pool size");
  }
  if (static_cast<int>(point.x.size()) != valuer.train().dim) {
    throw InvalidArgument("mc_distributional: point dimension mismatch");
  }

  Rng rng(seed);
  std::vector<int> idx;
  std::vector<int> pool(static_cast<std::size_t>(n));
  double acc = 0.0;
  for (std::uint64_t j = 0; j < plan.num_samples; ++j) {
    const int c = plan.min_cardinality +
                  static_cast<int>(rng.uniform_below(
                      static_cast<std::uint64_t>(max_card - plan.min_cardinality + 1)));
    if (plan.with_replacement) {
      idx.resize(static_cast<std::size_t>(c));
      for (int t = 0; t < c; ++t) {
        idx[static_cast<std::size_t>(t)] =
            static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n)));
      }
    } else {
      for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
      draw_subset_into(rng, pool, c);
      idx.assign(pool.begin(), pool.begin() + c);
    }
    const double with = valuer.metric_value(idx, &point);
    const double without = valuer.metric_value(idx);
    acc += with - without;
  }

  NoisyLabelRecord rec;
  rec.method = "mc_distributional";
  rec.num_samples = plan.num_samples;
  rec.seed = seed;
  rec.label.assign(1, acc / static_cast<double>(plan.num_samples));
  rec.evals_used = 2 * plan.num_samples;
  check_finite_label(rec);
  return rec;
}

NoisyLabelRecord mc_datamodels(const CooperativeGame& game, int player, double q, std::uint64_t k,
                               std::uint64_t seed) {
  const int n = game.num_players();
  if (player < 0 || player >= n) throw InvalidArgument("mc_datamodels: player out of range");
  if (q < 0.0 || q > 1.0) throw InvalidArgument("mc_datamodels: q must lie in [0, 1]");
  if (k < 1) throw InvalidArgument("mc_datamodels: k must be >= 1");
  Rng rng(seed);
  double acc = 0.0;
  for (std::uint64_t j = 0; j < k; ++j) {
    Coalition t(n);
    for (int i = 0; i < n; ++i) {
      if (i == player) continue;
      if (rng.bernoulli(q)) t.add(i);
    }
    const double without = game.value(t);
    t.add(player);
    const double with = game.value(t);
    acc += with - without;
  }
  NoisyLabelRecord rec;
  rec.method = "mc_datamodels";
  rec.num_samples = k;
  rec.seed = seed;
  rec.label.assign(1, acc / static_cast<double>(k));
  rec.evals_used = 2 * k;
  check_finite_label(rec);
  return rec;
}

}  // namespace semval
