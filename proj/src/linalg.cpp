#include "semval/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "semval/errors.hpp"

namespace semval {

bool ldlt_solve(std::vector<double> a, std::vector<double> b, int n, std::vector<double>* x,
                double tol) {
  if (n <= 0 || a.size() != static_cast<std::size_t>(n) * n ||
      b.size() != static_cast<std::size_t>(n)) {
    throw InvalidArgument("ldlt_solve: shape mismatch");
  }
  double max_diag = 0.0;
  for (int i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(a[i * n + i]));
  if (max_diag == 0.0) max_diag = 1.0;

  // Factor A = L D L^T; L unit lower triangular stored in a, D on the diagonal.
  for (int j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (int k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k] * a[k * n + k];
    if (std::abs(d) < tol * max_diag) return false;
    a[j * n + j] = d;
    for (int i = j + 1; i < n; ++i) {
      double v = a[i * n + j];
      for (int k = 0; k < j; ++k) v -= a[i * n + k] * a[j * n + k] * a[k * n + k];
      a[i * n + j] = v / d;
    }
  }
  // Forward solve L z = b.
  for (int i = 0; i < n; ++i) {
    double v = b[i];
    for (int k = 0; k < i; ++k) v -= a[i * n + k] * b[k];
    b[i] = v;
  }
  // Diagonal and backward solve.
  for (int i = 0; i < n; ++i) b[i] /= a[i * n + i];
  for (int i = n - 1; i >= 0; --i) {
    double v = b[i];
    for (int k = i + 1; k < n; ++k) v -= a[k * n + i] * b[k];
    b[i] = v;
  }
  *x = std::move(b);
  return true;
}

std::vector<double> solve_spd_with_ridge_fallback(const std::vector<double>& a,
                                                  const std::vector<double>& b, int n,
                                                  double ridge) {
  std::vector<double> x;
  if (ldlt_solve(a, b, n, &x)) return x;
  std::vector<double> damped = a;
  for (int i = 0; i < n; ++i) damped[i * n + i] += ridge;
  if (ldlt_solve(std::move(damped), b, n, &x)) return x;
  throw NumericalError("linear system singular even after ridge fallback");
}

std::vector<double> symmetric_eigenvalues(std::vector<double> a, int n) {
  if (n <= 0 || a.size() != static_cast<std::size_t>(n) * n) {
    throw InvalidArgument("symmetric_eigenvalues: shape mismatch");
  }
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
    }
    if (off < 1e-30) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a[k * n + p];
          const double akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a[p * n + k];
          const double aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (int i = 0; i < n; ++i) eig[i] = a[i * n + i];
  std::sort(eig.begin(), eig.end());
  return eig;
}

}  // namespace semval
