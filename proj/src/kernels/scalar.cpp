#include <cmath>

#include "mdt/kernels.hpp"

namespace mdt::kernels::detail {
namespace {

void add_inplace(double* acc, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += x[i];
}

void axpy(double* y, double a, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double t = a * x[i];
    y[i] += t;
  }
}

void scale_abs(double* x, double s, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] = std::fabs(x[i] * s);
}

double max_abs(const double* x, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::fabs(x[i]);
    if (a > m) m = a;
  }
  return m;
}

std::size_t count_greater(const double* x, std::size_t n, double t) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < n; ++i) c += x[i] > t ? 1 : 0;
  return c;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable t{add_inplace, axpy, scale_abs, max_abs, count_greater};
  return t;
}

}  // namespace mdt::kernels::detail
