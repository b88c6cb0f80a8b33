#include "doctest.h"

#include <bit>
#include <cstring>
#include <random>
#include <vector>

#include "mdt/errors.hpp"
#include "mdt/kernels.hpp"

using namespace mdt::kernels;

namespace {

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> e(-30.0, 30.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng) * std::exp(e(rng));
  if (n > 3) {
    v[1] = -0.0;
    v[2] = 1e-310;  // subnormal
  }
  return v;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

std::vector<Backend> simd_backends() {
  std::vector<Backend> out;
  for (Backend b : {Backend::Avx2, Backend::Neon})
    if (available(b)) out.push_back(b);
  return out;
}

}  // namespace

TEST_CASE("scalar backend is always available") {
  CHECK(available(Backend::Scalar));
  CHECK(name(Backend::Scalar) == "scalar");
  MESSAGE("active kernels: " << name(active()));
}

TEST_CASE("unavailable backends are rejected") {
  for (Backend b : {Backend::Avx2, Backend::Neon}) {
    if (!available(b)) CHECK_THROWS_AS(set_active(b), mdt::DomainError);
  }
}

TEST_CASE("scalar reference semantics") {
  const auto& t = table(Backend::Scalar);
  std::vector<double> acc{1, 2, 3}, x{0.5, -4, 1};
  t.add_inplace(acc.data(), x.data(), 3);
  CHECK(acc == std::vector<double>{1.5, -2, 4});
  t.axpy(acc.data(), 2.0, x.data(), 3);
  CHECK(acc == std::vector<double>{2.5, -10, 6});
  t.scale_abs(acc.data(), -0.5, 3);
  CHECK(acc == std::vector<double>{1.25, 5, 3});
  CHECK(t.max_abs(x.data(), 3) == 4.0);
  CHECK(t.max_abs(x.data(), 0) == 0.0);
  CHECK(t.count_greater(x.data(), 3, 0.5) == 1);
  CHECK(t.count_greater(x.data(), 3, -10) == 3);
}

TEST_CASE("SIMD variants are bit-identical to scalar") {
  const auto simd = simd_backends();
  if (simd.empty()) {
    MESSAGE("no SIMD backend on this machine");
    return;
  }
  std::mt19937_64 rng(17);
  const auto& ref = table(Backend::Scalar);
  for (Backend b : simd) {
    const auto& t = table(b);
    for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 31u, 64u, 1000u, 1027u}) {
      const auto x = random_vector(rng, n);
      const auto y0 = random_vector(rng, n);
      const double a = std::uniform_real_distribution<double>(-3, 3)(rng);

      auto r1 = y0, s1 = y0;
      ref.add_inplace(r1.data(), x.data(), n);
      t.add_inplace(s1.data(), x.data(), n);
      REQUIRE(same_bits(r1, s1));

      auto r2 = y0, s2 = y0;
      ref.axpy(r2.data(), a, x.data(), n);
      t.axpy(s2.data(), a, x.data(), n);
      REQUIRE(same_bits(r2, s2));

      auto r3 = y0, s3 = y0;
      ref.scale_abs(r3.data(), a, n);
      t.scale_abs(s3.data(), a, n);
      REQUIRE(same_bits(r3, s3));

      REQUIRE(std::bit_cast<std::uint64_t>(ref.max_abs(x.data(), n)) ==
              std::bit_cast<std::uint64_t>(t.max_abs(x.data(), n)));
      for (double thr : {0.0, a, 1e-5, -1e3}) {
        REQUIRE(ref.count_greater(x.data(), n, thr) == t.count_greater(x.data(), n, thr));
      }
    }
  }
}

TEST_CASE("set_active switches the span wrappers") {
  const Backend before = active();
  set_active(Backend::Scalar);
  CHECK(active() == Backend::Scalar);
  std::vector<double> v{-3, 2, -7};
  CHECK(max_abs(v) == 7.0);
  CHECK(count_greater(v, 0.0) == 1);
  set_active(before);
}
