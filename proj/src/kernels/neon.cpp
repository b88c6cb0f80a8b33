#include "mdt/kernels.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)

#include <arm_neon.h>

#include <cmath>

namespace mdt::kernels::detail {
namespace {

constexpr std::size_t kLanes = 2;

void add_inplace(double* acc, const double* x, std::size_t n) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) vst1q_f64(acc + i, vaddq_f64(vld1q_f64(acc + i), vld1q_f64(x + i)));
  for (; i < n; ++i) acc[i] += x[i];
}

void axpy(double* y, double a, const double* x, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    // vmulq + vaddq rather than vfmaq: must round like the scalar path.
    const float64x2_t t = vmulq_f64(va, vld1q_f64(x + i));
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), t));
  }
  for (; i < n; ++i) {
    const double t = a * x[i];
    y[i] += t;
  }
}

void scale_abs(double* x, double s, std::size_t n) {
  const float64x2_t vs = vdupq_n_f64(s);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) vst1q_f64(x + i, vabsq_f64(vmulq_f64(vld1q_f64(x + i), vs)));
  for (; i < n; ++i) x[i] = std::fabs(x[i] * s);
}

double max_abs(const double* x, std::size_t n) {
  float64x2_t m = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) m = vmaxq_f64(m, vabsq_f64(vld1q_f64(x + i)));
  double r = vmaxvq_f64(m);
  for (; i < n; ++i) {
    const double a = std::fabs(x[i]);
    if (a > r) r = a;
  }
  return r;
}

std::size_t count_greater(const double* x, std::size_t n, double t) {
  const float64x2_t vt = vdupq_n_f64(t);
  std::size_t c = 0;
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const uint64x2_t gt = vcgtq_f64(vld1q_f64(x + i), vt);
    c += static_cast<std::size_t>(vgetq_lane_u64(gt, 0) & 1) + static_cast<std::size_t>(vgetq_lane_u64(gt, 1) & 1);
  }
  for (; i < n; ++i) c += x[i] > t ? 1 : 0;
  return c;
}

}  // namespace

const KernelTable* neon_table() {
  static const KernelTable t{add_inplace, axpy, scale_abs, max_abs, count_greater};
  return &t;
}

}  // namespace mdt::kernels::detail

#else

namespace mdt::kernels::detail {
const KernelTable* neon_table() { return nullptr; }
}  // namespace mdt::kernels::detail

#endif
