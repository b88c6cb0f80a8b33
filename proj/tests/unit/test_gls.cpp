#include "doctest.h"

#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <random>
#include <sstream>

#include "mdt/errors.hpp"
#include "mdt/gls.hpp"

using namespace mdt;

namespace {
const double e = std::exp(1.0);

MdtParams law(double beta, double gamma, const char* v = "c(1)") {
  return MdtParams::create(beta, gamma, SlowlyVarying::parse(v));
}

// inf over p in [2, b - delta] of (k psi(p) / z)^p, brute force on a dense
// grid with Brent polishing of each local minimum.
double chebyshev_inf(const GeneratingFunction& psi, double k, double z) {
  auto log_bound = [&](double p) { return p * std::log(k * psi(p) / z); };
  const int n = 4000;
  const double lo = 2.0, hi = psi.upper();
  std::vector<double> ps(n + 1), vs(n + 1);
  for (int i = 0; i <= n; ++i) {
    // half the points uniform, half geometric toward b
    ps[i] = i % 2 == 0 ? lo + (hi - lo) * i / n : psi.b() - (psi.b() - lo) * std::pow(psi.delta_p() / (psi.b() - lo), double(i) / n);
  }
  std::sort(ps.begin(), ps.end());
  double best = INFINITY;
  for (int i = 0; i <= n; ++i) vs[i] = log_bound(ps[i]), best = std::min(best, vs[i]);
  for (int i = 0; i <= n; ++i) {
    if ((i > 0 && vs[i] > vs[i - 1]) || (i < n && vs[i] > vs[i + 1])) continue;
    const double a = ps[i > 0 ? i - 1 : 0], b = ps[i < n ? i + 1 : n];
    const auto r = boost::math::tools::brent_find_minima(log_bound, a, b, 52);
    best = std::min(best, r.second);
  }
  return std::min(1.0, std::exp(best));
}
}  // namespace

TEST_CASE("generating function validation") {
  CHECK_THROWS_AS(GeneratingFunction::constant(1.0, 2.0), DomainError);
  CHECK_THROWS_AS(GeneratingFunction::constant(0.0, 3.0), DomainError);
  const auto psi = GeneratingFunction::constant(1.0, 3.0);
  CHECK_THROWS_AS(psi(1.9), DomainError);
  CHECK_THROWS_AS(psi(3.0), DomainError);
  CHECK(psi.upper() == doctest::Approx(3.0 - kDeltaP));
  const GeneratingFunction bad(3.0, [](double) { return -1.0; }, Provenance::CustomGrid);
  CHECK_THROWS_AS(bad(2.5), DomainError);
  CHECK(std::string(provenance_name(Provenance::AnalyticTheta)) == "analytic-theta");
}

TEST_CASE("norm of a law against its own natural function") {
  for (const auto& l : {law(4, 0), law(3, 1, "lp(1)"), law(3, -2, "lp(-1)")}) {
    const auto curve = moment_curve(l, linear_grid(2.0, l.beta() - 0.01, 50));
    const auto psi = GeneratingFunction::natural(curve, l.beta());
    CHECK(gls_norm_from_moments(curve, psi).value == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("norm homogeneity") {
  const auto l = law(4, 0);
  auto curve = moment_curve(l, linear_grid(2.0, 3.9, 40));
  const auto psi = GeneratingFunction::analytic_theta(ThetaRegime::of(l));
  const double k = gls_norm_from_moments(curve, psi).value;
  for (std::size_t i = 0; i < curve.p.size(); ++i) curve.moment[i] *= std::pow(2.0, curve.p[i]);
  CHECK(gls_norm_from_moments(curve, psi).value == doctest::Approx(2 * k).epsilon(1e-12));
  CHECK_THROWS_AS(gls_norm_from_moments(MomentCurve{}, psi), DomainError);
}

TEST_CASE("norm against the analytic theta function") {
  const auto l = law(4, 0);
  const auto psi = GeneratingFunction::analytic_theta(ThetaRegime::of(l));
  const auto coarse = gls_norm_from_moments(moment_curve(l, linear_grid(2.0, 4 - kDeltaP, 200)), psi);
  const auto fine = gls_norm_from_moments(moment_curve(l, linear_grid(2.0, 4 - kDeltaP, 399)), psi);
  CHECK(std::isfinite(coarse.value));
  // moment^(1/p) / theta^(1/p) = e 4^(1/p) is decreasing, so the sup sits at p = 2
  CHECK(coarse.argsup == 2.0);
  CHECK(coarse.value == doctest::Approx(2 * e).epsilon(1e-9));
  CHECK(fine.value == doctest::Approx(coarse.value).epsilon(1e-4));
}

TEST_CASE("empirical norm") {
  std::vector<double> c(2000, -1.7);
  const auto one = GeneratingFunction::constant(1.0, 4.0);
  const auto grid = empirical_p_grid(one, 4.0);
  CHECK(gls_norm_empirical(c, one, grid).value == doctest::Approx(1.7).epsilon(1e-12));
  CHECK_THROWS_AS(gls_norm_empirical(std::vector<double>(999, 1.0), one, grid), DomainError);
  CHECK(grid.back() == doctest::Approx(3.5));

  const auto l = law(4, 0);
  const auto batch = sample(l, 8, 1'000'000);
  auto doubled = batch.values;
  doubled.insert(doubled.end(), batch.values.begin(), batch.values.end());
  const auto psi = GeneratingFunction::analytic_theta(ThetaRegime::of(l));
  const auto capped = empirical_p_grid(psi, l.beta(), 16, 3.5);
  const double emp = gls_norm_empirical(batch, psi, capped).value;
  CHECK(gls_norm_empirical(doubled, psi, capped).value == doctest::Approx(emp).epsilon(1e-12));
  const double exact = gls_norm_from_moments(moment_curve(l, capped), psi).value;
  CHECK(std::fabs(emp / exact - 1) < 0.05);
}

TEST_CASE("fenchel examples") {
  const auto one = GeneratingFunction::constant(1.0, 3.0);
  auto f = fenchel(one, 1.0);
  CHECK(f.value == doctest::Approx(3.0 - kDeltaP).epsilon(1e-12));
  CHECK(f.argmax == doctest::Approx(3.0 - kDeltaP).epsilon(1e-12));

  const auto ee = GeneratingFunction::constant(e, 3.0);
  CHECK(std::fabs(fenchel(ee, 1.0).value) < 1e-12);
  CHECK(fenchel(ee, 2.0).value == doctest::Approx(3.0 - kDeltaP).epsilon(1e-12));

  // case A theta with beta=4, gamma=0: nu(p) = -ln(4 - p), nu*(y) = 4y - ln y - 1
  const auto psi = GeneratingFunction::analytic_theta(ThetaRegime::of(law(4, 0)));
  for (double y : {5.0, 10.0, 30.0}) {
    const auto g = fenchel(psi, y);
    CHECK(g.value == doctest::Approx(4 * y - std::log(y) - 1).epsilon(1e-10));
    CHECK(g.argmax == doctest::Approx(4 - 1 / y).epsilon(1e-6));
  }
  CHECK(fenchel(psi, 30.0).value / (4 * 30.0 - std::log(30.0)) == doctest::Approx(1.0).epsilon(0.01));
  CHECK_THROWS_AS(fenchel(psi, NAN), DomainError);
}

TEST_CASE("tail from norm examples") {
  const auto one = GeneratingFunction::constant(1.0, 3.0);
  for (double z : {e, 10.0, 1e3}) {
    CHECK(tail_from_gls(one, 1.0, z) == doctest::Approx(std::pow(z, -(3 - kDeltaP))).epsilon(1e-10));
  }
  const auto big = GeneratingFunction::constant(e, 3.5);
  CHECK(tail_from_gls(big, 1.0, e) == 1.0);
  CHECK_THROWS_AS(tail_from_gls(one, 0.0, 10.0), DomainError);
  CHECK_THROWS_AS(tail_from_gls(one, -1.0, 10.0), DomainError);
  CHECK_THROWS_AS(tail_from_gls(one, 1.0, 2.0), DomainError);
  // k-homogeneity
  CHECK(tail_from_gls(one, 2.0, 20.0) == doctest::Approx(tail_from_gls(one, 1.0, 10.0)).epsilon(1e-12));
}

TEST_CASE("markov dominance and optimized Chebyshev identity") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double beta = 2.2 + 4 * unit(rng);
    const double gamma = -3 + 6 * unit(rng);
    const auto l = MdtParams::create(beta, gamma, SlowlyVarying::log_power(2 * unit(rng) - 1));
    const auto psi = GeneratingFunction::analytic_theta(ThetaRegime::of(l));
    const double k = 0.1 + 3 * unit(rng);
    const double z = k * std::exp(1 + 20 * unit(rng));
    const double t = tail_from_gls(psi, k, z);
    for (double p : fenchel_grid(psi)) REQUIRE(t <= std::pow(k * psi(p) / z, p) * (1 + 1e-12));
    REQUIRE(t == doctest::Approx(chebyshev_inf(psi, k, z)).epsilon(1e-9));
  }
}

TEST_CASE("fenchel curve shape") {
  for (const auto& l : {law(4, 0), law(3, -1), law(3, -2, "lp(-1)"), law(5, 2, "ilp(1)")}) {
    const auto psi = GeneratingFunction::analytic_theta(ThetaRegime::of(l));
    std::vector<double> ys;
    for (double y = 0.0; y <= 40.0; y += 0.25) ys.push_back(y);
    const auto c = fenchel_curve(psi, ys);
    for (std::size_t i = 1; i < ys.size(); ++i) {
      REQUIRE(c.nu_star[i] >= c.nu_star[i - 1] - 1e-9);
      REQUIRE(c.p_star[i] >= c.p_star[i - 1] - 1e-6);
    }
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> y(0.0, 40.0);
    for (int i = 0; i < 100; ++i) {
      const double a = y(rng), b = y(rng);
      const double mid = fenchel(psi, 0.5 * (a + b)).value;
      REQUIRE(mid <= 0.5 * (fenchel(psi, a).value + fenchel(psi, b).value) + 1e-8);
    }
    std::ostringstream os;
    write_csv(os, c);
    CHECK(os.str().rfind("y,nu_star,p_star\n", 0) == 0);
  }
}

TEST_CASE("grid generating function") {
  const auto g = GeneratingFunction::from_grid({2.0, 3.0}, {1.0, std::exp(2.0)}, 4.0);
  CHECK(g(2.5) == doctest::Approx(std::exp(1.0)));
  CHECK(g(3.5) == doctest::Approx(std::exp(2.0)));
  CHECK_THROWS_AS(GeneratingFunction::from_grid({3.0, 2.0}, {1.0, 1.0}, 4.0), DomainError);
  CHECK_THROWS_AS(GeneratingFunction::from_grid({2.0, 3.0}, {1.0, 0.0}, 4.0), DomainError);
}
