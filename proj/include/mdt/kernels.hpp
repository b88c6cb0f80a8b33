#pragma once

// Data-parallel inner loops of the Monte Carlo harness.
//
// Each kernel has a scalar reference implementation and SIMD variants
// (AVX2 on x86-64, NEON on AArch64) selected once at runtime. Every variant
// performs the same IEEE operations in the same order per element, so all
// backends produce bit-identical results; the equivalence tests check this.
// The MDT_KERNELS environment variable ("scalar", "avx2", "neon") overrides
// the automatic choice.

#include <cstddef>
#include <span>
#include <string_view>

namespace mdt::kernels {

enum class Backend { Scalar, Avx2, Neon };

struct KernelTable {
  /// acc[i] += x[i]
  void (*add_inplace)(double* acc, const double* x, std::size_t n);
  /// y[i] += a * x[i] (separate multiply and add)
  void (*axpy)(double* y, double a, const double* x, std::size_t n);
  /// x[i] = |x[i] * s|
  void (*scale_abs)(double* x, double s, std::size_t n);
  /// max |x[i]|, 0 for n == 0
  double (*max_abs)(const double* x, std::size_t n);
  /// number of i with x[i] > t
  std::size_t (*count_greater)(const double* x, std::size_t n, double t);
};

bool available(Backend b);
const KernelTable& table(Backend b);

Backend active();
/// Throws DomainError if the backend is not available on this CPU/build.
void set_active(Backend b);

std::string_view name(Backend b);

// Span wrappers over the active table.

inline void add_inplace(std::span<double> acc, std::span<const double> x) {
  table(active()).add_inplace(acc.data(), x.data(), acc.size() < x.size() ? acc.size() : x.size());
}

inline void axpy(std::span<double> y, double a, std::span<const double> x) {
  table(active()).axpy(y.data(), a, x.data(), y.size() < x.size() ? y.size() : x.size());
}

inline void scale_abs(std::span<double> x, double s) {
  table(active()).scale_abs(x.data(), s, x.size());
}

inline double max_abs(std::span<const double> x) { return table(active()).max_abs(x.data(), x.size()); }

inline std::size_t count_greater(std::span<const double> x, double t) {
  return table(active()).count_greater(x.data(), x.size(), t);
}

namespace detail {
const KernelTable& scalar_table();
const KernelTable* avx2_table();  // nullptr when not compiled in
const KernelTable* neon_table();
bool cpu_has_avx2();
}  // namespace detail

}  // namespace mdt::kernels
