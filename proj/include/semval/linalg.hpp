#pragma once

#include <vector>

namespace semval {

// Dense symmetric helpers for the small systems this library solves (weighted
// least squares up to ~(n+1)^2, learner normal equations in feature dimension).
// Matrices are row-major.

// Solves A x = b for symmetric A via LDL^T, in place on copies. Returns false
// if a pivot falls below tol * max|diag| (treat as singular).
bool ldlt_solve(std::vector<double> a, std::vector<double> b, int n, std::vector<double>* x,
                double tol = 1e-12);

// Solves A x = b for symmetric A; on singularity retries once with
// `ridge` added to the diagonal. Throws NumericalError if still singular.
std::vector<double> solve_spd_with_ridge_fallback(const std::vector<double>& a,
                                                  const std::vector<double>& b, int n,
                                                  double ridge = 1e-9);

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
std::vector<double> symmetric_eigenvalues(std::vector<double> a, int n);

}  // namespace semval
