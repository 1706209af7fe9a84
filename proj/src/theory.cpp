#include "semval/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "semval/errors.hpp"
#include "semval/linalg.hpp"
#include "semval/math_util.hpp"
#include "semval/parallel.hpp"
#include "semval/rng.hpp"
#include "semval/simd/kernels.hpp"

namespace semval {

namespace {

// Standard error of the mean from cross-context scatter.
double se_of_mean(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  return std::sqrt(variance_sample(values) / static_cast<double>(values.size()));
}

}  // namespace

OracleStats estimate_bias_noise(const DrawFn& noisy, const ExactFn& exact, int num_contexts,
                                int draws, std::uint64_t base_seed, int workers) {
  if (!noisy || !exact) throw InvalidArgument("estimate_bias_noise: missing oracle");
  if (num_contexts < 1) throw InvalidArgument("estimate_bias_noise: need at least one context");
  if (draws < 2) throw InvalidArgument("estimate_bias_noise: need at least 2 draws per context");

  OracleStats stats;
  stats.num_contexts = num_contexts;
  stats.draws_per_context = draws;
  stats.bias_per_context.resize(static_cast<std::size_t>(num_contexts));
  stats.bias_signed.resize(static_cast<std::size_t>(num_contexts));
  stats.noise_per_context.resize(static_cast<std::size_t>(num_contexts));
  stats.draw_means.resize(static_cast<std::size_t>(num_contexts));

  parallel_for(num_contexts, workers, [&](int c) {
    const std::vector<double> truth = exact(c);
    const std::size_t m = truth.size();
    if (m == 0) throw InvalidArgument("estimate_bias_noise: empty exact label");
    const std::uint64_t ctx_seed = mix_seed(base_seed, static_cast<std::uint64_t>(c));
    std::vector<std::vector<double>> draws_buf;
    draws_buf.reserve(static_cast<std::size_t>(draws));
    std::vector<double> mean_vec(m, 0.0);
    for (int j = 0; j < draws; ++j) {
      std::vector<double> x = noisy(c, mix_seed(ctx_seed, static_cast<std::uint64_t>(j)));
      if (x.size() != m) throw InvalidArgument("estimate_bias_noise: draw dimension mismatch");
      for (double v : x) {
        if (!std::isfinite(v)) throw NumericalError("estimate_bias_noise: non-finite draw");
      }
      draws_buf.push_back(std::move(x));
    }
    // Mean per coordinate via pairwise sums so results do not depend on the
    // draw accumulation order.
    std::vector<double> coord(static_cast<std::size_t>(draws));
    for (std::size_t k = 0; k < m; ++k) {
      for (int j = 0; j < draws; ++j) {
        coord[static_cast<std::size_t>(j)] = draws_buf[static_cast<std::size_t>(j)][k];
      }
      mean_vec[k] = mean(coord);
    }
    std::vector<double> dev_sq(static_cast<std::size_t>(draws));
    for (int j = 0; j < draws; ++j) {
      dev_sq[static_cast<std::size_t>(j)] =
          simd::sqdist(draws_buf[static_cast<std::size_t>(j)].data(), mean_vec.data(), m);
    }
    const double noise = pairwise_sum(dev_sq) / static_cast<double>(draws - 1);
    const double dist_sq = simd::sqdist(truth.data(), mean_vec.data(), m);
    const double signed_bias = dist_sq - noise / static_cast<double>(draws);
    const std::size_t cc = static_cast<std::size_t>(c);
    stats.noise_per_context[cc] = noise;
    stats.bias_signed[cc] = signed_bias;
    stats.bias_per_context[cc] = std::max(0.0, signed_bias);
    stats.draw_means[cc] = std::move(mean_vec);
  });

  stats.label_dim = static_cast<int>(stats.draw_means.front().size());
  stats.bias_hat = mean(stats.bias_per_context);
  stats.noise_hat = mean(stats.noise_per_context);
  stats.bias_signed_mean = mean(stats.bias_signed);
  stats.bias_signed_se = se_of_mean(stats.bias_signed);
  // A deterministic biased oracle has zero spread, so the SE gate alone would
  // never fire. The second gate uses a scale-aware floor instead of zero:
  // blocked summation leaves O(eps^2) dust relative to the label magnitude,
  // and dust must not read as bias on an exact oracle.
  double mag_sq = 0.0;
  for (const std::vector<double>& dm : stats.draw_means) {
    mag_sq += simd::sumsq(dm.data(), dm.size());
  }
  mag_sq /= static_cast<double>(num_contexts);
  const double dust_floor = 1e-24 * (mag_sq + stats.noise_hat);
  stats.flagged_biased = stats.bias_signed_mean > 3.0 * stats.bias_signed_se &&
                         stats.bias_signed_mean > dust_floor;
  return stats;
}

SandwichReport check_sandwich(const std::vector<std::vector<double>>& predictions,
                              const OracleStats& stats,
                              const std::vector<std::vector<double>>& exact_labels) {
  const std::size_t count = predictions.size();
  if (count == 0) throw InvalidArgument("check_sandwich: no contexts");
  if (stats.draw_means.size() != count || exact_labels.size() != count) {
    throw InvalidArgument("check_sandwich: stats, predictions and labels must align");
  }
  const int r = stats.draws_per_context;
  if (r < 2) throw InvalidArgument("check_sandwich: stats lack draws");

  std::vector<double> l_reg_c(count), l_noisy_c(count), diff_c(count), noisy_minus_noise(count);
  for (std::size_t c = 0; c < count; ++c) {
    const std::vector<double>& pred = predictions[c];
    const std::size_t m = pred.size();
    if (exact_labels[c].size() != m || stats.draw_means[c].size() != m) {
      throw InvalidArgument("check_sandwich: label dimension mismatch");
    }
    const double reg = simd::sqdist(pred.data(), exact_labels[c].data(), m);
    // Unbiased replay of the per-context noisy loss from the stored draw
    // mean: mean_j ||pred - x_j||^2 = ||pred - mean||^2 + (r-1)/r * noise.
    const double noisy = simd::sqdist(pred.data(), stats.draw_means[c].data(), m) +
                         (static_cast<double>(r - 1) / r) * stats.noise_per_context[c];
    l_reg_c[c] = reg;
    l_noisy_c[c] = noisy;
    diff_c[c] = noisy - stats.noise_per_context[c] - reg;
    noisy_minus_noise[c] = noisy - stats.noise_per_context[c];
  }

  SandwichReport rep;
  rep.l_reg = mean(l_reg_c);
  rep.l_noisy = mean(l_noisy_c);
  rep.noise_hat = stats.noise_hat;
  rep.bias_hat = stats.bias_hat;

  const double centered = rep.l_noisy - rep.noise_hat;
  const double centered_se = se_of_mean(noisy_minus_noise);
  // Interval endpoints for the bias come from the signed estimates: clipping
  // inflates the mean for an unbiased oracle, which would push the interval
  // strictly above zero and fabricate a positive lower bound for a perfect
  // model. The endpoints are clipped instead, after the shift.
  const double bias_center = mean(stats.bias_signed);
  const double bias_se = se_of_mean(stats.bias_signed);

  const double sl = std::sqrt(std::max(0.0, centered));
  const double sb = std::sqrt(std::max(0.0, rep.bias_hat));
  rep.lower = (sl - sb) * (sl - sb);
  rep.upper = (sl + sb) * (sl + sb);

  // Conservative endpoints: widen each input by 3 standard errors, then take
  // the extreme of |sqrt(centered) - sqrt(bias)| over the widened intervals.
  const double c_lo = std::sqrt(std::max(0.0, centered - 3.0 * centered_se));
  const double c_hi = std::sqrt(std::max(0.0, centered + 3.0 * centered_se));
  const double b_lo = std::sqrt(std::max(0.0, bias_center - 3.0 * bias_se));
  const double b_hi = std::sqrt(std::max(0.0, bias_center + 3.0 * bias_se));
  const bool overlap = c_lo <= b_hi && b_lo <= c_hi;
  const double min_gap = overlap ? 0.0 : std::min(std::abs(c_lo - b_hi), std::abs(b_lo - c_hi));
  rep.lower_slack = min_gap * min_gap;
  rep.upper_slack = (c_hi + b_hi) * (c_hi + b_hi);
  rep.sandwich_holds = rep.lower_slack <= rep.l_reg && rep.l_reg <= rep.upper_slack;

  rep.anomaly = centered < -3.0 * centered_se;

  rep.equality_applicable = !stats.flagged_biased;
  if (rep.equality_applicable) {
    rep.equality_gap = mean(diff_c);
    rep.equality_se = se_of_mean(diff_c);
    rep.equality_holds = std::abs(rep.equality_gap) <= 3.0 * std::max(rep.equality_se, 1e-15);
  }
  return rep;
}

SandwichReport check_sandwich(const AmortizedModel& model,
                              const std::vector<ContextRecord>& contexts,
                              const OracleStats& stats,
                              const std::vector<std::vector<double>>& exact_labels) {
  std::vector<std::vector<double>> predictions;
  predictions.reserve(contexts.size());
  for (const ContextRecord& ctx : contexts) predictions.push_back(model.predict(ctx.features));
  return check_sandwich(predictions, stats, exact_labels);
}

double averaged_sgd_bound(const SgdBoundInputs& in) {
  if (!(in.lambda_min_p > 0.0)) {
    throw InvalidArgument("averaged_sgd_bound: lambda_min_p must be positive");
  }
  if (in.trace_sigma_p < 0.0 || in.lambda_max_q < 0.0 || in.noise_q < 0.0 || in.radius < 0.0 ||
      in.steps < 1) {
    throw InvalidArgument("averaged_sgd_bound: invalid inputs");
  }
  return 4.0 * in.trace_sigma_p * (in.noise_q + 4.0 * in.lambda_max_q * in.radius * in.radius) /
         (in.lambda_min_p * (in.steps + 1));
}

SgdBoundInputs gaussian_sgd_bound_inputs(int input_dim, int output_dim, double sigma,
                                         double radius, int steps) {
  if (input_dim < 1 || output_dim < 1) {
    throw InvalidArgument("gaussian_sgd_bound_inputs: bad dimensions");
  }
  SgdBoundInputs in;
  in.trace_sigma_p = static_cast<double>(input_dim);
  in.lambda_min_p = 1.0;
  in.lambda_max_q = static_cast<double>(input_dim + 2) / input_dim;
  in.noise_q = output_dim * sigma * sigma;
  in.radius = radius;
  in.steps = steps;
  return in;
}

std::vector<SgdConvergenceRow> run_sgd_convergence_experiment(const SgdConvergenceConfig& cfg) {
  if (cfg.runs < 1) throw InvalidArgument("sgd experiment: runs must be >= 1");
  if (cfg.step_grid.empty()) throw InvalidArgument("sgd experiment: empty step grid");
  if (!(cfg.truth_radius_fraction > 0.0 && cfg.truth_radius_fraction <= 1.0)) {
    throw InvalidArgument("sgd experiment: truth_radius_fraction must lie in (0, 1]");
  }
  std::vector<int> grid = cfg.step_grid;
  std::sort(grid.begin(), grid.end());
  if (grid.front() < 1 || std::adjacent_find(grid.begin(), grid.end()) != grid.end()) {
    throw InvalidArgument("sgd experiment: step grid must be distinct positive integers");
  }

  const std::size_t d = static_cast<std::size_t>(cfg.input_dim);
  const std::size_t m = static_cast<std::size_t>(cfg.output_dim);
  const std::size_t psz = d * m;
  const int total_steps = grid.back();

  // excess[g][run]
  std::vector<std::vector<double>> excess(grid.size(),
                                          std::vector<double>(static_cast<std::size_t>(cfg.runs)));
  parallel_for(cfg.runs, cfg.workers, [&](int run) {
    const std::uint64_t run_seed = mix_seed(cfg.base_seed, static_cast<std::uint64_t>(run));
    Rng truth_rng(mix_seed(run_seed, "truth"));
    std::vector<double> theta_star(psz);
    for (double& v : theta_star) v = truth_rng.gauss();
    const double norm = std::sqrt(simd::sumsq(theta_star.data(), psz));
    if (norm > 0.0) {
      simd::scal(cfg.truth_radius_fraction * cfg.radius / norm, theta_star.data(), psz);
    }

    const double sigma = cfg.sigma;
    SampleFn sample = [&theta_star, sigma, d, m](Rng& rng, double* b, double* y) {
      for (std::size_t i = 0; i < d; ++i) b[i] = rng.gauss();
      simd::matvec(theta_star.data(), b, y, m, d);
      if (sigma > 0.0) {
        for (std::size_t j = 0; j < m; ++j) y[j] += sigma * rng.gauss();
      }
    };

    ProjectedSgdConfig sgd_cfg;
    sgd_cfg.steps = total_steps;
    sgd_cfg.radius = cfg.radius;
    sgd_cfg.alpha = 2.0;  // twice the smallest eigenvalue of the identity second moment
    const ProjectedSgdResult res =
        train_linear_projected_sgd(sample, cfg.input_dim, cfg.output_dim, sgd_cfg,
                                   mix_seed(run_seed, "sgd"), grid);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      // With standard normal contexts the excess noisy loss of theta equals
      // ||theta - theta*||_F^2 exactly.
      excess[g][static_cast<std::size_t>(run)] =
          simd::sqdist(res.theta_bar[g].data(), theta_star.data(), psz);
    }
  });

  std::vector<SgdConvergenceRow> rows;
  rows.reserve(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    SgdConvergenceRow row;
    row.steps = grid[g];
    row.empirical_excess = mean(excess[g]);
    row.excess_se = se_of_mean(excess[g]);
    row.bound = averaged_sgd_bound(
        gaussian_sgd_bound_inputs(cfg.input_dim, cfg.output_dim, cfg.sigma, cfg.radius, grid[g]));
    row.runs = cfg.runs;
    row.sigma = cfg.sigma;
    rows.push_back(row);
  }
  return rows;
}

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw InvalidArgument("fit_loglog_slope: need matching series of length >= 2");
  }
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      throw InvalidArgument("fit_loglog_slope: values must be positive");
    }
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  const double mx = mean(lx), my = mean(ly);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) throw InvalidArgument("fit_loglog_slope: x values are all equal");
  return sxy / sxx;
}

ConvexityReport check_convexity_sandwich(const std::vector<double>& h_matrix, int dim,
                                         const std::vector<std::vector<double>>& predictions,
                                         const std::vector<std::vector<double>>& exact_labels,
                                         double rel_tol) {
  if (dim < 1 || h_matrix.size() != static_cast<std::size_t>(dim) * dim) {
    throw InvalidArgument("convexity check: curvature matrix must be dim x dim");
  }
  const std::size_t d = static_cast<std::size_t>(dim);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      if (std::abs(h_matrix[i * d + j] - h_matrix[j * d + i]) > 1e-12) {
        throw InvalidArgument("convexity check: curvature matrix must be symmetric");
      }
    }
  }
  const std::vector<double> eig = symmetric_eigenvalues(h_matrix, dim);
  ConvexityReport rep;
  rep.alpha = eig.front();
  rep.beta = eig.back();
  if (!(rep.alpha > 0.0)) {
    throw InvalidArgument("convexity check: curvature matrix must be positive-definite");
  }
  const std::size_t count = predictions.size();
  if (count == 0 || exact_labels.size() != count) {
    throw InvalidArgument("convexity check: predictions and labels must align");
  }

  std::vector<double> reg_c(count), obj_c(count), he(d);
  for (std::size_t c = 0; c < count; ++c) {
    if (predictions[c].size() != d || exact_labels[c].size() != d) {
      throw InvalidArgument("convexity check: dimension mismatch");
    }
    std::vector<double> e(d);
    for (std::size_t i = 0; i < d; ++i) e[i] = predictions[c][i] - exact_labels[c][i];
    simd::matvec(h_matrix.data(), e.data(), he.data(), d, d);
    reg_c[c] = simd::sumsq(e.data(), d);
    obj_c[c] = 0.5 * simd::dot(e.data(), he.data(), d);
  }
  rep.l_reg = mean(reg_c);
  rep.l_obj = mean(obj_c);

  // The sandwich already holds per context; checking there too catches
  // cancellation in the averages.
  double max_lower = 0.0, max_upper = 0.0;
  for (std::size_t c = 0; c < count; ++c) {
    const double scale = std::max(1.0, std::abs(obj_c[c]));
    max_lower = std::max(max_lower, (0.5 * rep.alpha * reg_c[c] - obj_c[c]) / scale);
    max_upper = std::max(max_upper, (obj_c[c] - 0.5 * rep.beta * reg_c[c]) / scale);
  }
  const double gscale = std::max(1.0, std::abs(rep.l_obj));
  max_lower = std::max(max_lower, (0.5 * rep.alpha * rep.l_reg - rep.l_obj) / gscale);
  max_upper = std::max(max_upper, (rep.l_obj - 0.5 * rep.beta * rep.l_reg) / gscale);
  rep.max_lower_violation = max_lower;
  rep.max_upper_violation = max_upper;
  rep.holds = max_lower <= rel_tol && max_upper <= rel_tol;
  return rep;
}

}  // namespace semval
