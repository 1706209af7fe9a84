#include "semval/simd/kernels.hpp"

#include "semval/errors.hpp"

namespace semval::simd {

namespace {

struct KernelTable {
  double (*dot)(const double*, const double*, std::size_t);
  double (*sum)(const double*, std::size_t);
  double (*sumsq)(const double*, std::size_t);
  double (*sqdist)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*scal)(double, double*, std::size_t);
  void (*matvec)(const double*, const double*, double*, std::size_t, std::size_t);
};

constexpr KernelTable kScalarTable = {
    scalar::dot, scalar::sum, scalar::sumsq, scalar::sqdist,
    scalar::axpy, scalar::scal, scalar::matvec,
};

#if defined(SEMVAL_HAVE_AVX2)
constexpr KernelTable kAvx2Table = {
    avx2::dot, avx2::sum, avx2::sumsq, avx2::sqdist,
    avx2::axpy, avx2::scal, avx2::matvec,
};
#endif

const KernelTable* table_for(Backend b) {
#if defined(SEMVAL_HAVE_AVX2)
  if (b == Backend::kAvx2) return &kAvx2Table;
#endif
  (void)b;
  return &kScalarTable;
}

bool available(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return true;
    case Backend::kAvx2:
#if defined(SEMVAL_HAVE_AVX2) && defined(__GNUC__)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

Backend g_active = available(Backend::kAvx2) ? Backend::kAvx2 : Backend::kScalar;
const KernelTable* g_table = table_for(g_active);

}  // namespace

Backend detect_backend() {
  return available(Backend::kAvx2) ? Backend::kAvx2 : Backend::kScalar;
}

Backend active_backend() { return g_active; }

void force_backend(Backend b) {
  if (!available(b)) {
    throw InvalidArgument(std::string("simd backend not available on this cpu: ") + backend_name(b));
  }
  g_active = b;
  g_table = table_for(b);
}

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return "scalar";
    case Backend::kAvx2:
      return "avx2";
  }
  return "unknown";
}

double dot(const double* a, const double* b, std::size_t n) { return g_table->dot(a, b, n); }
double sum(const double* x, std::size_t n) { return g_table->sum(x, n); }
double sumsq(const double* x, std::size_t n) { return g_table->sumsq(x, n); }
double sqdist(const double* a, const double* b, std::size_t n) { return g_table->sqdist(a, b, n); }
void axpy(double alpha, const double* x, double* y, std::size_t n) { g_table->axpy(alpha, x, y, n); }
void scal(double alpha, double* x, std::size_t n) { g_table->scal(alpha, x, n); }
void matvec(const double* a, const double* x, double* y, std::size_t rows, std::size_t cols) {
  g_table->matvec(a, x, y, rows, cols);
}

}  // namespace semval::simd
