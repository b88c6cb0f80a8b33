#include <atomic>
#include <cstdlib>
#include <string>

#include "mdt/errors.hpp"
#include "mdt/kernels.hpp"

namespace mdt::kernels {

namespace detail {

#if !defined(MDT_HAVE_AVX2)
const KernelTable* avx2_table() { return nullptr; }
#endif

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

}  // namespace detail

namespace {

Backend detect() {
  if (const char* env = std::getenv("MDT_KERNELS")) {
    const std::string want(env);
    if (want == "scalar") return Backend::Scalar;
    if (want == "avx2" && available(Backend::Avx2)) return Backend::Avx2;
    if (want == "neon" && available(Backend::Neon)) return Backend::Neon;
  }
  if (available(Backend::Avx2)) return Backend::Avx2;
  if (available(Backend::Neon)) return Backend::Neon;
  return Backend::Scalar;
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> b{detect()};
  return b;
}

}  // namespace

bool available(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
      return detail::avx2_table() != nullptr && detail::cpu_has_avx2();
    case Backend::Neon:
      return detail::neon_table() != nullptr;
  }
  return false;
}

const KernelTable& table(Backend b) {
  switch (b) {
    case Backend::Avx2:
      if (available(b)) return *detail::avx2_table();
      break;
    case Backend::Neon:
      if (available(b)) return *detail::neon_table();
      break;
    case Backend::Scalar:
      break;
  }
  return detail::scalar_table();
}

Backend active() { return current().load(std::memory_order_relaxed); }

void set_active(Backend b) {
  if (!available(b)) throw DomainError("kernel backend '" + std::string(name(b)) + "' not available");
  current().store(b, std::memory_order_relaxed);
}

std::string_view name(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
    case Backend::Neon:
      return "neon";
  }
  return "unknown";
}

}  // namespace mdt::kernels
