#pragma once

#include <cstddef>

// Double-precision kernels behind the library's arithmetic inner loops
// (estimator accumulation, learner Gram assembly, model training, metric
// reductions). Each op has a scalar reference implementation and may have
// vectorized variants; the active variant is chosen once at runtime from CPU
// features. Scalar and vector variants agree to rounding error, not bit-exactly,
// so frozen test values carry tolerances.

namespace semval::simd {

enum class Backend {
  kScalar,
  kAvx2,
};

// Highest backend this CPU supports.
Backend detect_backend();

// Backend used by the free functions below. Defaults to detect_backend().
Backend active_backend();

// Override for tests and benchmarks; kScalar is always accepted. Requesting an
// unavailable backend throws InvalidArgument.
void force_backend(Backend b);

const char* backend_name(Backend b);

double dot(const double* a, const double* b, std::size_t n);
double sum(const double* x, std::size_t n);
double sumsq(const double* x, std::size_t n);
// Sum of squared differences.
double sqdist(const double* a, const double* b, std::size_t n);
// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n);
// x *= alpha
void scal(double alpha, double* x, std::size_t n);
// y = A x, A row-major (rows x cols).
void matvec(const double* a, const double* x, double* y, std::size_t rows, std::size_t cols);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* x, std::size_t n);
double sumsq(const double* x, std::size_t n);
double sqdist(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scal(double alpha, double* x, std::size_t n);
void matvec(const double* a, const double* x, double* y, std::size_t rows, std::size_t cols);
}  // namespace scalar

#if defined(SEMVAL_HAVE_AVX2)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* x, std::size_t n);
double sumsq(const double* x, std::size_t n);
double sqdist(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scal(double alpha, double* x, std::size_t n);
void matvec(const double* a, const double* x, double* y, std::size_t rows, std::size_t cols);
}  // namespace avx2
#endif

}  // namespace semval::simd
