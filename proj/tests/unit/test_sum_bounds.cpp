#include "doctest.h"

#include <cmath>
#include <sstream>

#include "json.hpp"
#include "mdt/errors.hpp"
#include "mdt/rng.hpp"
#include "mdt/sum_bounds.hpp"

using namespace mdt;

namespace {
const double e = std::exp(1.0);

MdtParams law(double beta, double gamma, const char* v = "c(1)") {
  return MdtParams::create(beta, gamma, SlowlyVarying::parse(v));
}

std::vector<double> geometric(double lo, double hi, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = lo * std::pow(hi / lo, double(i) / (n - 1));
  return g;
}
}  // namespace

TEST_CASE("Rosenthal constant and bound") {
  const RosenthalModel r;
  CHECK(r.constant(2.0) == doctest::Approx(std::pow(4 / std::log(2.0), 2)));
  CHECK(r.constant(2.0) >= 1.0);
  CHECK(rosenthal_sum_moment(2.0, 3.0, 3.0) >= 3.0);
  // momentp branch active: x8 on both moments of 2 xi at p = 3
  const double base = rosenthal_sum_moment(3.0, 1.0, 10.0);
  CHECK(rosenthal_sum_moment(3.0, 4.0, 80.0) == doctest::Approx(8 * base).epsilon(1e-14));
  CHECK_THROWS_AS(rosenthal_sum_moment(3.0, 0.0, 1.0), DomainError);
}

TEST_CASE("Rosenthal bound dominates simulated sum moments") {
  const auto l = law(4, 0);
  const double p = 3.0;
  const double m2 = moment_from_tail(l, 2.0).value;
  const double mp = moment_from_tail(l, p).value;
  const double bound = rosenthal_sum_moment(p, m2, mp);
  const CounterStream root(77);
  const std::size_t reps = 1'000'000;
  for (std::size_t n : {1u, 4u, 16u, 64u, 256u}) {
    const CounterStream s = root.child(n);
    double sum = 0, sq = 0;
    for (std::size_t r = 0; r < reps; ++r) {
      double acc = 0;
      for (std::size_t i = 0; i < n; ++i) acc += draw_from_bits(l, s.bits(r * n + i));
      const double a = std::pow(std::fabs(acc / std::sqrt(double(n))), p);
      sum += a;
      sq += a * a;
    }
    const double mean = sum / reps;
    const double se = std::sqrt((sq / reps - mean * mean) / reps);
    MESSAGE("n=" << n << " E|S_n|^3 ~ " << mean << " bound " << bound);
    CHECK(mean - 3 * se <= bound);
  }
}

TEST_CASE("envelope dominates single-variable moments") {
  for (const auto& l : {law(4, 0), law(3, -1), law(3, -2, "lp(-1)")}) {
    const auto env = SumMomentEnvelope::build(l);
    for (std::size_t i = 0; i < env.p().size(); ++i) REQUIRE(env.envelope()[i] >= env.moment()[i]);
    CHECK(env.p().front() == 2.0);
    CHECK(env.p().back() == doctest::Approx(l.beta() - kDeltaP));
    CHECK(env.c1() > 0);
    CHECK(env.markov_bound(1.0) == 1.0);
    CHECK(env.markov_bound(1e6) < env.markov_bound(1e3));
  }
  const auto b = SumMomentEnvelope::build(law(3, -1));
  CHECK(std::find(b.p().begin(), b.p().end(), 2.0) != b.p().end());
}

TEST_CASE("closed form examples") {
  const auto a = SumBoundModel::with_constants(law(3, 0), 1.0, 1.0);
  CHECK(q_bound_closed(a, e) == doctest::Approx(std::exp(-3.0)).epsilon(1e-13));
  CHECK(q_bound_closed(a, e * e) == doctest::Approx(2 * std::exp(-6.0)).epsilon(1e-13));
  const auto b = SumBoundModel::with_constants(law(3, -1), 1.0, 1.0);
  CHECK(q_bound_closed(b, std::exp(e)) == doctest::Approx(std::exp(-3 * e)).epsilon(1e-13));
  CHECK_THROWS_AS(q_bound_closed(b, e), DomainError);
  const auto c_bad = SumBoundModel::with_constants(law(3, -2), 1.0, 1.0);
  CHECK_THROWS_AS(q_bound_closed(c_bad, 10.0), PreconditionError);
  CHECK_THROWS_AS(closed_curve(c_bad), PreconditionError);
  const auto c = SumBoundModel::with_constants(law(3, -2, "lp(-1)"), 1.0, 1.0);
  CHECK(q_bound_closed(c, 10.0) == doctest::Approx(std::pow(10.0, -3) / (1 + std::log1p(std::log(10.0)))));
  // clamp
  CHECK(q_bound_closed(SumBoundModel::with_constants(law(3, 0), 1.0, 1e9), e) == 1.0);
}

TEST_CASE("Fenchel bound asymptotics, clamp, monotonicity") {
  const auto l = law(3, 0);
  const auto model = SumBoundModel::pessimistic(SumMomentEnvelope::build(l));
  // -ln bound - (3 y - ln y) settles to a constant
  auto excess = [&](double y) { return -std::log(q_bound_fenchel(model, std::exp(y))) - (3 * y - std::log(y)); };
  CHECK(std::fabs(excess(60) - excess(120)) < 0.05);
  CHECK(std::fabs(excess(120) - excess(240)) < 0.02);

  const auto huge = SumBoundModel::with_constants(l, 1e12, 1.0);
  CHECK(q_bound_fenchel(huge, e) == 1.0);
  CHECK_THROWS_AS(q_bound_fenchel(model, 2.0), DomainError);

  double prev = 1.0;
  for (double u : geometric(e, 1e20, 100)) {
    const double b = q_bound_fenchel(model, u);
    REQUIRE(b <= prev);
    prev = b;
  }
  const auto d = q_bound_fenchel_detail(model, 1e10);
  CHECK(d.converged);
  CHECK(d.shift == doctest::Approx(std::pow(model.c1_sum, 1 / d.p_star)));
}

TEST_CASE("Fenchel bound dominates the optimized Markov bound") {
  for (const auto& l : {law(4, 0), law(3, -1), law(3, -2, "lp(-1)")}) {
    const auto env = SumMomentEnvelope::build(l);
    const auto model = SumBoundModel::pessimistic(env);
    for (double u : geometric(e, 1e30, 60)) REQUIRE(q_bound_fenchel(model, u) >= env.markov_bound(u) * (1 - 1e-9));
  }
}

TEST_CASE("upper bounds agree asymptotically in case A") {
  const auto model = SumBoundModel::pessimistic(SumMomentEnvelope::build(law(4, 0)));
  double prev_gap = INFINITY;
  for (double y : {5.0, 10.0, 20.0, 30.0}) {
    const double r = std::log(q_bound_fenchel(model, std::exp(y))) / std::log(q_bound_closed(model, std::exp(y)));
    const double gap = std::fabs(r - 1);
    CHECK(gap <= prev_gap);
    prev_gap = gap;
    MESSAGE("y=" << y << " ratio " << r);
  }
  CHECK(prev_gap <= 0.05);
}

TEST_CASE("sandwich and log gap") {
  for (const auto& l : {law(4, 0), law(3, -1), law(3, 1, "lp(1)"), law(3, -2, "lp(-1)")}) {
    const auto model = SumBoundModel::pessimistic(SumMomentEnvelope::build(l));
    CHECK(model.closed_constant >= 1.0);
    for (double u : geometric(closed_domain_start(l), 1e30, 80)) {
      REQUIRE(lower_witness(l, u) <= q_bound_closed(model, u));
      REQUIRE(lower_witness(l, u) <= q_bound_fenchel(model, u));
    }
  }
  // closed / witness grows like ln u in case A
  const auto l = law(4, 0.5, "lp(1)");
  const auto model = SumBoundModel::with_constants(l, 1.0, 1.0);
  auto lr = [&](double y) {
    const double u = std::exp(y);
    return std::log(closed_shape(l, u) / lower_witness(l, u));
  };
  const double slope = (lr(150) - lr(20)) / (std::log(150.0) - std::log(20.0));
  CHECK(slope == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(lower_witness(l, l.u_star()) == 1.0);
  CHECK_THROWS_AS(lower_witness(l, l.u_star() * 0.5), DomainError);
}

TEST_CASE("tail curves") {
  const auto l = law(4, 0);
  const auto model = SumBoundModel::pessimistic(SumMomentEnvelope::build(l));
  const auto grid = geometric(1.0, 1e8, 120);
  for (const auto& c : {fenchel_curve(model), closed_curve(model), lower_witness_curve(l)}) {
    double prev = 1.0;
    for (double u : grid) {
      const double v = c(u);
      REQUIRE(v >= 0.0);
      REQUIRE(v <= prev);
      prev = v;
    }
    // scale covariance: the curve of 2 xi is u -> curve(u / 2)
    const auto twice = c.rescaled(2.0);
    for (double u : grid) REQUIRE(twice(u) == c(u / 2));
    CHECK(twice.scale() == 2.0);
  }
  CHECK(lower_witness_curve(l).is_lower());
  CHECK(closed_curve(model).kind() == CurveKind::ClosedEx1);
  CHECK(closed_curve(SumBoundModel::with_constants(law(3, -1), 1, 1)).kind() == CurveKind::ClosedEx2);
  CHECK(closed_curve(SumBoundModel::with_constants(law(3, -2, "lp(-1)"), 1, 1)).kind() == CurveKind::ClosedEx3);

  std::ostringstream os;
  write_csv(os, closed_curve(model), {e, 10.0});
  std::istringstream in(os.str());
  std::string header, columns;
  std::getline(in, header);
  std::getline(in, columns);
  CHECK(header.rfind("# constants: ", 0) == 0);
  const auto constants = nlohmann::json::parse(header.substr(13));
  CHECK(constants["C1"].get<double>() == doctest::Approx(model.closed_constant));
  CHECK(columns == "u,bound,provenance");
}

TEST_CASE("calibration") {
  const auto l = law(4, 0);
  const auto base = SumBoundModel::pessimistic(SumMomentEnvelope::build(l));
  const auto grid = geometric(l.u_star(), 100.0, 30);
  std::vector<double> qhat;
  for (double u : grid) qhat.push_back(2 * survival(l, u));
  const auto closed = calibrate_closed(base, grid, qhat, 0.01);
  CHECK(closed.mode == ConstantMode::Calibrated);
  CHECK(closed.closed_constant < base.closed_constant);
  for (std::size_t i = 0; i < grid.size(); ++i) REQUIRE(q_bound_closed(closed, grid[i]) >= std::min(1.0, qhat[i] + 0.01) * (1 - 1e-12));
  // halving breaks domination somewhere
  auto halved = closed;
  halved.closed_constant *= 0.5;
  bool violated = false;
  for (std::size_t i = 0; i < grid.size(); ++i) violated |= q_bound_closed(halved, grid[i]) < std::min(1.0, qhat[i] + 0.01);
  CHECK(violated);

  const auto fen = calibrate_fenchel(base, grid, qhat, 0.01);
  for (std::size_t i = 0; i < grid.size(); ++i) REQUIRE(q_bound_fenchel(fen, grid[i]) >= std::min(1.0, qhat[i] + 0.01));
  CHECK(fen.c1_sum < base.c1_sum);
  CHECK(calibrate_linear({1, 2}, {0.5, 0.5}, [](double u) { return 1 / u; }) == doctest::Approx(1.0));
}
