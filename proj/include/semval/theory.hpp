#pragma once

// Verification harnesses for the statistical claims the library rests on:
// oracle bias/noise estimation, the two-sided loss sandwich relating the
// regression loss under noisy labels to the loss against exact labels, the
// convergence bound for averaged projected SGD on linear models, and the
// strong-convexity/smoothness sandwich for quadratic objectives.
//
// Every statistical assertion uses 3-standard-error slack. With the default
// fixture sizes that budgets roughly one false positive per thousand checks.

#include <cstdint>
#include <functional>
#include <vector>

#include "semval/amortize.hpp"

namespace semval {

// One fresh noisy estimate of the expensive quantity for a context; the seed
// fully determines the draw.
using DrawFn = std::function<std::vector<double>(int context_index, std::uint64_t seed)>;
using ExactFn = std::function<std::vector<double>(int context_index)>;

struct OracleStats {
  int num_contexts = 0;
  int draws_per_context = 0;
  int label_dim = 0;
  // Means over contexts. bias entries are clipped at zero; the signed version
  // keeps the raw estimate, whose mean is centered at zero for an unbiased
  // oracle (the clipped mean is not).
  double bias_hat = 0.0;
  double noise_hat = 0.0;
  double bias_signed_mean = 0.0;
  double bias_signed_se = 0.0;
  bool flagged_biased = false;  // signed mean exceeds 3 standard errors
  std::vector<double> bias_per_context;    // clipped at 0
  std::vector<double> bias_signed;         // before clipping
  std::vector<double> noise_per_context;   // trace of the sample covariance
  std::vector<std::vector<double>> draw_means;  // per-context mean of the draws
};

// Draws `draws` independent estimates per context and compares against the
// exact values. The squared distance from the exact value to the draw mean
// overshoots the squared bias by noise/draws; that correction is subtracted
// before clipping. draws >= 2.
OracleStats estimate_bias_noise(const DrawFn& noisy, const ExactFn& exact, int num_contexts,
                                int draws, std::uint64_t base_seed, int workers = 1);

struct SandwichReport {
  double l_reg = 0.0;    // mean squared error against exact labels
  double l_noisy = 0.0;  // estimated mean squared error against the noisy oracle
  double noise_hat = 0.0;
  double bias_hat = 0.0;
  double lower = 0.0;  // point estimates of the two-sided bound
  double upper = 0.0;
  double lower_slack = 0.0;  // bound endpoints shifted by 3 standard errors
  double upper_slack = 0.0;
  bool sandwich_holds = false;  // lower_slack <= l_reg <= upper_slack
  // When the oracle is not flagged biased the identity
  // l_reg = l_noisy - noise must hold up to sampling error; checked on
  // per-context paired differences.
  bool equality_applicable = false;
  double equality_gap = 0.0;
  double equality_se = 0.0;
  bool equality_holds = false;
  bool anomaly = false;  // l_noisy fell below noise_hat beyond slack
};

// The stats must come from estimate_bias_noise on the same contexts, in the
// same order; draw means stored there replay the noisy loss for any model
// without fresh oracle calls.
SandwichReport check_sandwich(const std::vector<std::vector<double>>& predictions,
                              const OracleStats& stats,
                              const std::vector<std::vector<double>>& exact_labels);
SandwichReport check_sandwich(const AmortizedModel& model,
                              const std::vector<ContextRecord>& contexts,
                              const OracleStats& stats,
                              const std::vector<std::vector<double>>& exact_labels);

struct SgdBoundInputs {
  double trace_sigma_p = 0.0;   // trace of the context second-moment matrix
  double lambda_min_p = 0.0;    // its smallest eigenvalue, must be positive
  double lambda_max_q = 0.0;    // largest eigenvalue under the norm-weighted law
  double noise_q = 0.0;         // norm-weighted oracle noise
  double radius = 0.0;          // Frobenius radius of the feasible set
  int steps = 0;
};

// Excess-loss guarantee for the averaged iterate of projected SGD after
// `steps` steps: 4 tr(S_p) (N_q + 4 lmax_q R^2) / (lmin_p (steps + 1)).
double averaged_sgd_bound(const SgdBoundInputs& in);

// Analytic inputs for standard normal contexts in dimension d with additive
// N(0, sigma^2 I_m) label noise: S_p = I, norm-weighted second moment
// ((d+2)/d) I, norm-weighted noise m sigma^2.
SgdBoundInputs gaussian_sgd_bound_inputs(int input_dim, int output_dim, double sigma,
                                         double radius, int steps);

struct SgdConvergenceConfig {
  int input_dim = 5;
  int output_dim = 3;
  double sigma = 1.0;
  double radius = 1.0;
  // Truth weights are drawn at this fraction of the radius so projection
  // never excludes them.
  double truth_radius_fraction = 0.9;
  int runs = 200;
  std::vector<int> step_grid = {10, 100, 1000};
  std::uint64_t base_seed = 0;
  int workers = 1;
};

struct SgdConvergenceRow {
  int steps = 0;
  double empirical_excess = 0.0;  // mean over runs of the averaged-iterate excess
  double excess_se = 0.0;
  double bound = 0.0;
  int runs = 0;
  double sigma = 0.0;
};

// Gaussian linear fixture: truth theta* inside the ball, contexts standard
// normal, labels theta* b + sigma N(0, I). The excess of the averaged iterate
// is computable in closed form as the squared Frobenius distance to theta*.
std::vector<SgdConvergenceRow> run_sgd_convergence_experiment(const SgdConvergenceConfig& cfg);

// Least-squares slope of log(y) against log(x). Requires at least two
// distinct positive x and positive y.
double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct ConvexityReport {
  double alpha = 0.0;  // smallest eigenvalue of the curvature matrix
  double beta = 0.0;   // largest eigenvalue
  double l_reg = 0.0;
  double l_obj = 0.0;  // mean quadratic objective, minimum subtracted
  double max_lower_violation = 0.0;
  double max_upper_violation = 0.0;
  bool holds = false;
};

// Objective h(a; b) = (a - a(b))^T H (a - a(b)) / 2 with symmetric
// positive-definite H. Asserts alpha/2 * l_reg <= l_obj <= beta/2 * l_reg,
// which is exact for quadratics; tolerance covers rounding only.
ConvexityReport check_convexity_sandwich(const std::vector<double>& h_matrix, int dim,
                                         const std::vector<std::vector<double>>& predictions,
                                         const std::vector<std::vector<double>>& exact_labels,
                                         double rel_tol = 1e-12);

}  // namespace semval
