#include "semval/exact.hpp"

#include <bit>
#include <cmath>

#include "semval/errors.hpp"
#include "semval/linalg.hpp"
#include "semval/math_util.hpp"

namespace semval {

ValueTable enumerate_game(const CooperativeGame& game) {
  const int n = game.num_players();
  if (n > kMaxExactPlayers) {
    throw ResourceLimitError("exact enumeration limited to " +
                             std::to_string(kMaxExactPlayers) + " players, got " +
                             std::to_string(n));
  }
  ValueTable table;
  table.n = n;
  table.v.resize(std::size_t{1} << n);
  for (std::uint32_t mask = 0; mask < table.v.size(); ++mask) {
    table.v[mask] = game.value(Coalition::from_mask(mask, n));
  }
  return table;
}

SemivalueWeights shapley_weights(int n) {
  if (n <= 0) throw InvalidArgument("shapley weights: bad player count");
  SemivalueWeights weights;
  weights.n = n;
  weights.w.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    weights.w[static_cast<std::size_t>(k)] = std::exp(-log_binom(n - 1, k)) / n;
  }
  return weights;
}

SemivalueWeights banzhaf_weights(int n) {
  if (n <= 0) throw InvalidArgument("banzhaf weights: bad player count");
  SemivalueWeights weights;
  weights.n = n;
  weights.w.assign(static_cast<std::size_t>(n), std::exp2(-(n - 1.0)));
  return weights;
}

SemivalueWeights datamodels_weights(int n, double q) {
  if (n <= 0) throw InvalidArgument("datamodels weights: bad player count");
  if (q < 0.0 || q > 1.0) throw InvalidArgument("datamodels weights: q must lie in [0, 1]");
  SemivalueWeights weights;
  weights.n = n;
  weights.w.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    weights.w[static_cast<std::size_t>(k)] = std::pow(q, k) * std::pow(1.0 - q, n - 1 - k);
  }
  return weights;
}

void validate_semivalue_weights(const SemivalueWeights& weights) {
  const int n = weights.n;
  if (n <= 0 || weights.w.size() != static_cast<std::size_t>(n)) {
    throw InvalidArgument("semivalue weights: shape mismatch");
  }
  double total = 0.0;
  for (int k = 0; k < n; ++k) {
    const double wk = weights.w[static_cast<std::size_t>(k)];
    if (!(wk >= 0.0)) throw InvalidArgument("semivalue weights: negative or non-finite weight");
    total += binom(n - 1, k) * wk;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw InvalidArgument("semivalue weights: cardinality-weighted sum is " +
                          std::to_string(total) + ", expected 1");
  }
}

std::vector<double> exact_semivalue(const ValueTable& table, const SemivalueWeights& weights) {
  const int n = table.n;
  if (weights.n != n) throw InvalidArgument("exact semivalue: weight/game size mismatch");
  validate_semivalue_weights(weights);
  std::vector<double> phi(static_cast<std::size_t>(n), 0.0);
  const std::uint32_t full = static_cast<std::uint32_t>((std::uint64_t{1} << n) - 1);
  for (std::uint32_t mask = 0; mask <= full; ++mask) {
    const double base = table.v[mask];
    const double wk = weights.w[static_cast<std::size_t>(std::popcount(mask))];
    std::uint32_t rest = full & ~mask;
    while (rest) {
      const int i = std::countr_zero(rest);
      rest &= rest - 1;
      phi[static_cast<std::size_t>(i)] += wk * (table.v[mask | (1u << i)] - base);
    }
    if (mask == full) break;
  }
  return phi;
}

std::vector<double> exact_shapley(const ValueTable& table) {
  return exact_semivalue(table, shapley_weights(table.n));
}

std::vector<double> exact_banzhaf(const ValueTable& table) {
  return exact_semivalue(table, banzhaf_weights(table.n));
}

std::vector<double> exact_semivalue(const CooperativeGame& game, const SemivalueWeights& weights) {
  return exact_semivalue(enumerate_game(game), weights);
}

std::vector<double> exact_shapley(const CooperativeGame& game) {
  return exact_shapley(enumerate_game(game));
}

std::vector<double> exact_banzhaf(const CooperativeGame& game) {
  return exact_banzhaf(enumerate_game(game));
}

LSKernel shapley_ls_kernel(int n) {
  if (n < 2) throw InvalidArgument("shapley ls kernel: needs at least 2 players");
  LSKernel kernel;
  kernel.name = "shapley";
  kernel.constrained = true;
  kernel.weight = [n](const Coalition& s) {
    const int k = s.size();
    if (k == 0 || k == n) return 0.0;
    return 1.0 / (binom(n, k) * k * (n - k));
  };
  return kernel;
}

LSKernel lime_ls_kernel(int n, double width) {
  if (n < 1) throw InvalidArgument("lime ls kernel: bad player count");
  if (width <= 0.0) throw InvalidArgument("lime ls kernel: width must be positive");
  LSKernel kernel;
  kernel.name = "lime";
  kernel.constrained = false;
  kernel.weight = [n, width](const Coalition& s) {
    const double gap = 1.0 - static_cast<double>(s.size()) / n;
    return std::exp(-(gap * gap) / (width * width));
  };
  return kernel;
}

LSKernel bernoulli_ls_kernel(int n, double q) {
  if (n < 1) throw InvalidArgument("bernoulli ls kernel: bad player count");
  if (q <= 0.0 || q >= 1.0) {
    throw InvalidArgument("bernoulli ls kernel: q must lie strictly in (0, 1)");
  }
  LSKernel kernel;
  kernel.name = "bernoulli";
  kernel.constrained = false;
  kernel.weight = [n, q](const Coalition& s) {
    const int k = s.size();
    return std::pow(q, k) * std::pow(1.0 - q, n - k);
  };
  return kernel;
}

namespace {

// Unconstrained: solve the (n+1)-dim normal equations over [intercept, coeffs].
WeightedLSSolution solve_unconstrained(const ValueTable& table, const LSKernel& kernel) {
  const int n = table.n;
  const int p = n + 1;
  std::vector<double> normal(static_cast<std::size_t>(p) * p, 0.0);
  std::vector<double> rhs(static_cast<std::size_t>(p), 0.0);
  std::vector<int> idx(static_cast<std::size_t>(n) + 1);
  int positive_rows = 0;
  const std::uint32_t full = static_cast<std::uint32_t>((std::uint64_t{1} << n) - 1);
  for (std::uint32_t mask = 0;; ++mask) {
    const double w = kernel.weight(Coalition::from_mask(mask, n));
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw InvalidArgument("ls kernel: weight must be finite and nonnegative");
    }
    if (w > 0.0) {
      ++positive_rows;
      // Row support: intercept slot 0, then coefficient slots for members.
      int cnt = 0;
      idx[static_cast<std::size_t>(cnt++)] = 0;
      std::uint32_t bits = mask;
      while (bits) {
        idx[static_cast<std::size_t>(cnt++)] = std::countr_zero(bits) + 1;
        bits &= bits - 1;
      }
      const double wv = w * table.v[mask];
      for (int a = 0; a < cnt; ++a) {
        const int ia = idx[static_cast<std::size_t>(a)];
        rhs[static_cast<std::size_t>(ia)] += wv;
        for (int b = 0; b < cnt; ++b) {
          normal[static_cast<std::size_t>(ia) * p + idx[static_cast<std::size_t>(b)]] += w;
        }
      }
    }
    if (mask == full) break;
  }
  if (positive_rows < n + 1) {
    throw InvalidArgument("ls kernel: needs positive weight on at least n+1 coalitions");
  }
  const std::vector<double> sol = solve_spd_with_ridge_fallback(normal, rhs, p);
  WeightedLSSolution out;
  out.intercept = sol[0];
  out.coeffs.assign(sol.begin() + 1, sol.end());
  return out;
}

// Constrained: intercept = v(empty); coefficients sum to v(full) - v(empty).
// Eliminating the intercept and the last coefficient leaves an (n-1)-dim
// unconstrained problem with rows r[i] = 1(i in S) - 1(n-1 in S) and targets
// (v(S) - v(empty)) - 1(n-1 in S) * (v(full) - v(empty)).
WeightedLSSolution solve_constrained(const ValueTable& table, const LSKernel& kernel) {
  const int n = table.n;
  if (n < 2) throw InvalidArgument("constrained ls: needs at least 2 players");
  const std::uint32_t full = static_cast<std::uint32_t>((std::uint64_t{1} << n) - 1);
  const double v0 = table.v[0];
  const double delta = table.v[full] - v0;
  const int p = n - 1;
  std::vector<double> normal(static_cast<std::size_t>(p) * p, 0.0);
  std::vector<double> rhs(static_cast<std::size_t>(p), 0.0);
  std::vector<double> row(static_cast<std::size_t>(p));
  int positive_rows = 0;
  for (std::uint32_t mask = 1; mask < full; ++mask) {
    const double w = kernel.weight(Coalition::from_mask(mask, n));
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw InvalidArgument("ls kernel: weight must be finite and nonnegative");
    }
    if (w == 0.0) continue;
    ++positive_rows;
    const double last = (mask >> (n - 1)) & 1u ? 1.0 : 0.0;
    for (int i = 0; i < p; ++i) {
      row[static_cast<std::size_t>(i)] = (((mask >> i) & 1u) ? 1.0 : 0.0) - last;
    }
    const double target = (table.v[mask] - v0) - last * delta;
    for (int a = 0; a < p; ++a) {
      const double ra = row[static_cast<std::size_t>(a)];
      if (ra == 0.0) continue;
      rhs[static_cast<std::size_t>(a)] += w * target * ra;
      for (int b = 0; b < p; ++b) {
        normal[static_cast<std::size_t>(a) * p + b] += w * ra * row[static_cast<std::size_t>(b)];
      }
    }
  }
  if (positive_rows < n - 1) {
    throw InvalidArgument("ls kernel: needs positive weight on at least n-1 proper coalitions");
  }
  WeightedLSSolution out;
  out.intercept = v0;
  const std::vector<double> sol = solve_spd_with_ridge_fallback(normal, rhs, p);
  out.coeffs.assign(sol.begin(), sol.end());
  double used = 0.0;
  for (double c : out.coeffs) used += c;
  out.coeffs.push_back(delta - used);
  return out;
}

}  // namespace

WeightedLSSolution exact_weighted_ls(const ValueTable& table, const LSKernel& kernel) {
  if (!kernel.weight) throw InvalidArgument("ls kernel: missing weight function");
  return kernel.constrained ? solve_constrained(table, kernel) : solve_unconstrained(table, kernel);
}

WeightedLSSolution exact_weighted_ls(const CooperativeGame& game, const LSKernel& kernel) {
  return exact_weighted_ls(enumerate_game(game), kernel);
}

std::vector<double> exact_datamodels(const ValueTable& table, double q) {
  if (q <= 0.0 || q >= 1.0) {
    throw InvalidArgument("exact datamodels: q must lie strictly in (0, 1)");
  }
  const std::vector<double> marginal = exact_semivalue(table, datamodels_weights(table.n, q));
  const WeightedLSSolution reg = exact_weighted_ls(table, bernoulli_ls_kernel(table.n, q));
  for (int i = 0; i < table.n; ++i) {
    if (std::abs(marginal[static_cast<std::size_t>(i)] - reg.coeffs[static_cast<std::size_t>(i)]) >
        1e-9) {
      throw NumericalError("datamodels marginal-sum and regression routes disagree at player " +
                           std::to_string(i));
    }
  }
  return marginal;
}

std::vector<double> exact_datamodels(const CooperativeGame& game, double q) {
  return exact_datamodels(enumerate_game(game), q);
}

std::vector<double> exact_datamodels_symmetric(const ValueTable& table, SubsetLaw law,
                                               double param) {
  const int n = table.n;
  double p1 = 0.0, p2 = 0.0, p3 = 0.0;
  int fixed_k = 0;
  if (law == SubsetLaw::kBernoulli) {
    const double q = param;
    if (q <= 0.0 || q >= 1.0) {
      throw InvalidArgument("symmetric datamodels: bernoulli q must lie strictly in (0, 1)");
    }
    p1 = q;
    p2 = q * q;
    p3 = q * (1.0 - q);
  } else {
    fixed_k = static_cast<int>(param);
    if (static_cast<double>(fixed_k) != param || fixed_k <= 0 || fixed_k >= n) {
      throw InvalidArgument("symmetric datamodels: fixed size must be an integer in (0, n)");
    }
    p1 = static_cast<double>(fixed_k) / n;
    p2 = static_cast<double>(fixed_k) * (fixed_k - 1) / (static_cast<double>(n) * (n - 1));
    p3 = static_cast<double>(fixed_k) * (n - fixed_k) / (static_cast<double>(n) * (n - 1));
  }
  if (p3 <= 0.0) throw InvalidArgument("symmetric datamodels: p3 must be positive");

  // c_i(T) = (1/p3) (1(i in T) - sigma |T| - tau). The fixed-size law makes the
  // shared denominator p3 + n (p2 - p1^2) exactly zero while |T| is constant,
  // so the sigma |T| + tau pair degenerates to the constant p1; that branch
  // reproduces the minimum-norm solution of the (rank-deficient) fixed-size
  // regression.
  const double denom = p3 + n * (p2 - p1 * p1);
  double sigma, tau;
  if (std::abs(denom) < 1e-12) {
    sigma = 0.0;
    tau = p1;
  } else {
    sigma = (p2 - p1 * p1) / denom;
    tau = p1 * p3 / denom;
  }

  const std::uint32_t full = static_cast<std::uint32_t>((std::uint64_t{1} << n) - 1);
  std::vector<double> zeta(static_cast<std::size_t>(n), 0.0);
  for (std::uint32_t mask = 0;; ++mask) {
    const int size = std::popcount(mask);
    double prob;
    if (law == SubsetLaw::kBernoulli) {
      prob = std::pow(p1, size) * std::pow(1.0 - p1, n - size);
    } else {
      prob = (size == fixed_k) ? 1.0 / binom(n, fixed_k) : 0.0;
    }
    if (prob > 0.0) {
      const double common = (-sigma * size - tau) / p3;
      const double pv = prob * table.v[mask];
      for (int i = 0; i < n; ++i) {
        const double ci = common + (((mask >> i) & 1u) ? 1.0 / p3 : 0.0);
        zeta[static_cast<std::size_t>(i)] += pv * ci;
      }
    }
    if (mask == full) break;
  }
  return zeta;
}

std::vector<double> exact_datamodels_symmetric(const CooperativeGame& game, SubsetLaw law,
                                               double param) {
  return exact_datamodels_symmetric(enumerate_game(game), law, param);
}

}  // namespace semval
