#include "doctest.h"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <sstream>

#include "mdt/errors.hpp"
#include "mdt/moments.hpp"

using namespace mdt;

namespace {
const double e = std::exp(1.0);

MdtParams law(double beta, double gamma, const char* v = "c(1)") {
  return MdtParams::create(beta, gamma, SlowlyVarying::parse(v));
}

// E|xi|^p = u*^p + int_{u*}^inf p x^(p-1) S(x) dx, integrated in x by Boost.
double boost_moment(const MdtParams& l, double p) {
  boost::math::quadrature::exp_sinh<double> integrator;
  const double us = l.u_star();
  auto f = [&](double s) {
    const double x = us + s;
    const double tail = survival(l, x);
    return tail == 0.0 ? 0.0 : p * std::pow(x, p - 1) * tail;
  };
  double err = 0;
  const double tail = integrator.integrate(f, 1e-11, &err);
  return std::pow(us, p) + tail;
}
}  // namespace

TEST_CASE("pareto closed form") {
  // survival 1 up to u* = e, (u/e)^-beta beyond: E X^p = e^p beta / (beta - p)
  const auto l = law(4, 0);
  CHECK(l.is_pareto());
  const auto m = moment_from_tail(l, 2.0);
  CHECK(m.value == doctest::Approx(2 * e * e).epsilon(1e-10));
  CHECK(m.error < 1e-8 * m.value);
  for (double p : {2.0, 2.5, 3.0, 3.5, 3.9, 3.99, 3.999}) {
    const double exact = std::pow(e, p) * 4 / (4 - p);
    CHECK(moment_from_tail(l, p).value == doctest::Approx(exact).epsilon(1e-9));
  }
  const auto l3 = law(3, 0, "c(5)");
  CHECK(moment_from_tail(l3, 2.5).value == doctest::Approx(std::pow(e, 2.5) * 3 / 0.5).epsilon(1e-9));
}

TEST_CASE("total mass") { CHECK(raw_moment(law(4, 1, "lp(1)"), 0.0).value == 1.0); }

TEST_CASE("domain errors") {
  const auto l = law(4, 0);
  CHECK_THROWS_AS(moment_from_tail(l, 1.5), DomainError);
  CHECK_THROWS_AS(moment_from_tail(l, 3.9995), DomainError);
  CHECK_THROWS_AS(moment_from_tail(l, 4.0), DomainError);
  CHECK_NOTHROW(moment_from_tail(l, 4.0 - kDeltaP));
  CHECK_THROWS_AS(theta(ThetaRegime::of(l), 4.0), DomainError);
  CHECK_THROWS_AS(theta(ThetaRegime::of(l), 1.0), DomainError);
}

TEST_CASE("agreement with an independent quadrature") {
  for (const auto& l : {law(4, 1), law(4, 1, "lp(1)"), law(3, -2, "lp(-1)"), law(3, -1), law(5, 2, "ilp(-1)*c(3)")}) {
    for (double p : {2.0, 2.4, l.beta() - 0.6}) {
      const auto m = moment_from_tail(l, p);
      CHECK(m.value == doctest::Approx(boost_moment(l, p)).epsilon(1e-8));
      CHECK(m.error <= 1e-8 * m.value);
    }
  }
}

// |xi|^3 has infinite variance when beta = 4, so the plain sample mean has no
// usable standard error. The oracle truncates at T: the truncated mean has
// finite variance and the remainder E[|xi|^3; |xi| > T] is integrated
// independently.
TEST_CASE("monte carlo oracle at beta=4, gamma=1, p=3") {
  const auto l = law(4, 1);
  const double p = 3.0;
  const auto m = moment_from_tail(l, p);
  CHECK(m.error < 1e-8 * m.value);

  const double T = quantile(l, 1e-4);
  boost::math::quadrature::exp_sinh<double> integrator;
  auto f = [&](double s) {
    const double x = T + s;
    const double tail = survival(l, x);
    return tail == 0.0 ? 0.0 : p * std::pow(x, p - 1) * tail;
  };
  const double remainder = std::pow(T, p) * survival(l, T) + integrator.integrate(f, 1e-11);

  const auto s = sample(l, 2024, 10'000'000);
  double sum = 0, sq = 0;
  for (double x : s.values) {
    const double a = std::fabs(x) <= T ? std::pow(std::fabs(x), p) : 0.0;
    sum += a;
    sq += a * a;
  }
  const double n = double(s.values.size());
  const double mean = sum / n;
  const double se = std::sqrt((sq / n - mean * mean) / n);
  MESSAGE("quadrature " << m.value << ", truncated MC " << mean << " + remainder " << remainder << ", se " << se);
  CHECK(std::fabs(mean + remainder - m.value) <= 3 * se);
}

TEST_CASE("theta and natural psi examples") {
  CHECK(theta(ThetaRegime::of(law(3, 0)), 2.0) == doctest::Approx(1.0));
  CHECK(theta(ThetaRegime::of(law(3, 2)), 2.5) == doctest::Approx(8.0));
  const auto b = ThetaRegime::of(law(3, -1));
  CHECK(b.tag == Regime::B);
  CHECK(theta(b, 2.0) == kThetaMin);
  CHECK(natural_psi(ThetaRegime::of(law(3, 0)), 2.0) == doctest::Approx(1.0));
  CHECK(natural_psi(ThetaRegime::of(law(4, 0)), 2.0) == doctest::Approx(std::sqrt(0.5)));
  CHECK(natural_psi(ThetaRegime::of(law(3, 2)), 2.5) == doctest::Approx(std::pow(8.0, 0.4)).epsilon(1e-12));
  CHECK(natural_psi(b, 2.0) == doctest::Approx(std::pow(kThetaMin, 0.5)));
}

TEST_CASE("regime dispatch and formulas") {
  CHECK(ThetaRegime::of(law(3, 0.5)).tag == Regime::A);
  CHECK(ThetaRegime::of(law(3, -1)).tag == Regime::B);
  CHECK(ThetaRegime::of(law(3, -1.5)).tag == Regime::C);
  const auto v = SlowlyVarying::parse("lp(2)*ilp(-1)");
  const double p = 2.7, g = 3 - p;
  CHECK(theta(ThetaRegime::of(MdtParams::create(3, 0.5, v)), p) ==
        doctest::Approx(std::pow(g, -1.5) * v.eval(1 / g)).epsilon(1e-13));
  CHECK(theta(ThetaRegime::of(MdtParams::create(3, -1, v)), p) ==
        doctest::Approx(std::fabs(std::log(g)) * v.eval(1 / g)).epsilon(1e-13));
  CHECK(theta(ThetaRegime::of(MdtParams::create(3, -3, v)), p) == doctest::Approx(v.eval(1 / g)).epsilon(1e-13));
  CHECK(*regime_a_constant(ThetaRegime::of(law(3, 1.5))) == doctest::Approx(boost::math::tgamma(2.5)));
  CHECK_FALSE(regime_a_constant(ThetaRegime::of(law(3, -1))).has_value());
}

TEST_CASE("Lyapunov log-convexity and norm monotonicity") {
  for (const auto& l : {law(4, 0), law(3, -1), law(3, -2, "lp(-1)"), law(5, 1, "lp(1)")}) {
    const auto grid = linear_grid(2.0, l.beta() - 0.01, 61);
    const auto c = moment_curve(l, grid);
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
      const double mid = std::log(c.moment[i]);
      const double chord = 0.5 * (std::log(c.moment[i - 1]) + std::log(c.moment[i + 1]));
      REQUIRE(mid <= chord + 1e-9);
      REQUIRE(std::pow(c.moment[i], 1 / c.p[i]) >= std::pow(c.moment[i - 1], 1 / c.p[i - 1]));
      REQUIRE(c.moment[i] > 0);
    }
  }
}

TEST_CASE("theta divergence behaviour") {
  const auto a = ThetaRegime::of(law(4, 0));
  CHECK(theta(a, 3.999) > theta(a, 3.99));
  CHECK(theta(a, 3.99) > theta(a, 3.9));
  CHECK(theta(a, 3.999) >= 999.0);
  const auto c = ThetaRegime::of(law(3, -2));
  for (double p : linear_grid(2.0, 2.999, 100)) REQUIRE(theta(c, p) == 1.0);
}

TEST_CASE("equivalence on canonical laws") {
  struct Case {
    double beta, gamma;
    const char* v;
    Regime regime;
  };
  for (const auto& k : {Case{4, 0, "c(1)", Regime::A}, Case{3, -1, "c(1)", Regime::B},
                        Case{3, -2, "lp(-1)", Regime::C}}) {
    const auto l = law(k.beta, k.gamma, k.v);
    const auto r = verify_equivalence(l, linear_grid(k.beta - 0.5, k.beta - kDeltaP, 60));
    CHECK(r.regime == k.regime);
    CHECK(r.pass);
    CHECK(r.max_ratio / r.min_ratio <= 50.0);
    MESSAGE(std::string(regime_name(k.regime)) << " ratio band [" << r.min_ratio << ", " << r.max_ratio << "], limiting "
                                  << r.limiting_ratio);
  }
  // regime A: beta=4, gamma=0, u*=e gives ratio e^p beta exactly
  const auto r = verify_equivalence(law(4, 0), {3.5, 3.999});
  CHECK(r.ratio[0] == doctest::Approx(std::pow(e, 3.5) * 4).epsilon(1e-8));
  CHECK(r.gamma_constant.has_value());
}

TEST_CASE("equivalence csv") {
  const auto r = verify_equivalence(law(4, 0), {3.5, 3.9});
  std::ostringstream os;
  write_csv(os, r);
  CHECK(os.str().rfind("p,moment,theta,ratio,quad_error\n", 0) == 0);
}
