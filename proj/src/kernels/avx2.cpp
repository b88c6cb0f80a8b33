// Compiled with -mavx2 (see src/CMakeLists.txt); only reached after a
// runtime CPU check.

#include <immintrin.h>

#include <bit>
#include <cmath>

#include "mdt/kernels.hpp"

namespace mdt::kernels::detail {
namespace {

constexpr std::size_t kLanes = 4;

inline __m256d abs_pd(__m256d v) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v);
}

void add_inplace(double* acc, const double* x, std::size_t n) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    __m256d a = _mm256_loadu_pd(acc + i);
    a = _mm256_add_pd(a, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(acc + i, a);
  }
  for (; i < n; ++i) acc[i] += x[i];
}

void axpy(double* y, double a, const double* x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d t = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), t));
  }
  for (; i < n; ++i) {
    const double t = a * x[i];
    y[i] += t;
  }
}

void scale_abs(double* x, double s, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    _mm256_storeu_pd(x + i, abs_pd(_mm256_mul_pd(_mm256_loadu_pd(x + i), vs)));
  }
  for (; i < n; ++i) x[i] = std::fabs(x[i] * s);
}

double max_abs(const double* x, std::size_t n) {
  __m256d m = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    m = _mm256_max_pd(m, abs_pd(_mm256_loadu_pd(x + i)));
  }
  alignas(32) double lanes[kLanes];
  _mm256_store_pd(lanes, m);
  double r = 0.0;
  for (double v : lanes) r = v > r ? v : r;
  for (; i < n; ++i) {
    const double a = std::fabs(x[i]);
    if (a > r) r = a;
  }
  return r;
}

std::size_t count_greater(const double* x, std::size_t n, double t) {
  const __m256d vt = _mm256_set1_pd(t);
  std::size_t c = 0;
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d gt = _mm256_cmp_pd(_mm256_loadu_pd(x + i), vt, _CMP_GT_OQ);
    c += static_cast<std::size_t>(std::popcount(static_cast<unsigned>(_mm256_movemask_pd(gt))));
  }
  for (; i < n; ++i) c += x[i] > t ? 1 : 0;
  return c;
}

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable t{add_inplace, axpy, scale_abs, max_abs, count_greater};
  return &t;
}

}  // namespace mdt::kernels::detail
