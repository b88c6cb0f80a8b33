#include "mdt/distribution.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "mdt/errors.hpp"

namespace mdt {
namespace {

constexpr int kScanPoints = 4000;
constexpr double kScanMaxT = 1e6;
constexpr int kMaxRootIterations = 200;

// max(slope, log_tail): <= 0 where the tail is a legal, nonincreasing
// survival shape.
double activation_gap(const MdtParams& law, double t) {
  return std::max(law.log_tail_slope(t), law.log_tail(t));
}

std::vector<double> scan_grid(double t0) {
  std::vector<double> grid(kScanPoints + 1);
  const double ratio = std::log(kScanMaxT / t0) / kScanPoints;
  for (int k = 0; k <= kScanPoints; ++k) grid[k] = t0 * std::exp(ratio * k);
  grid[0] = t0;
  return grid;
}

}  // namespace

double MdtParams::log_tail(double t) const { return -beta_ * t + gamma_ * std::log(t) + std::log(v_.eval(t)); }

double MdtParams::log_tail_slope(double t) const { return -beta_ + gamma_ / t + v_.log_derivative(t); }

MdtParams MdtParams::create(double beta, double gamma, SlowlyVarying v, std::optional<double> u_star) {
  if (!std::isfinite(beta) || beta <= 2.0) throw DomainError("beta must be finite and > 2");
  if (!std::isfinite(gamma)) throw DomainError("gamma must be finite");

  MdtParams p;
  p.beta_ = beta;
  p.gamma_ = gamma;
  p.v_ = std::move(v);
  p.pareto_ = gamma == 0.0 && p.v_.is_constant();

  if (u_star) {
    if (!std::isfinite(*u_star) || *u_star < std::numbers::e) {
      throw DomainError("u_star must be finite and >= e");
    }
    const double t0 = std::log(*u_star);
    for (double t : scan_grid(t0)) {
      if (p.log_tail_slope(t) > 0.0) {
        throw DomainError("tail formula increases beyond u_star = " + std::to_string(*u_star) +
                          " (at ln u = " + std::to_string(t) + ")");
      }
    }
    p.t_star_ = t0;
    p.u_star_ = *u_star;
  } else {
    const std::vector<double> grid = scan_grid(1.0);
    int last_bad = -1;
    for (int k = 0; k <= kScanPoints; ++k) {
      if (activation_gap(p, grid[k]) > 0.0) last_bad = k;
    }
    if (last_bad == kScanPoints) throw NumericError("tail formula never becomes a survival shape");
    double t_star = 1.0;
    if (last_bad >= 0) {
      double lo = grid[last_bad];
      double hi = grid[last_bad + 1];
      for (int i = 0; i < 200 && hi - lo > 4e-16 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (activation_gap(p, mid) > 0.0 ? lo : hi) = mid;
      }
      t_star = hi;
    }
    p.t_star_ = t_star;
    p.u_star_ = t_star == 1.0 ? std::numbers::e : std::exp(t_star);
  }
  p.log_tail_star_ = p.log_tail(p.t_star_);
  return p;
}

double tail_formula(const MdtParams& law, double u) {
  if (!(u >= std::numbers::e) || !std::isfinite(u)) throw DomainError("tail formula requires finite u >= e");
  const double t = std::log(u);
  return std::pow(u, -law.beta()) * std::pow(t, law.gamma()) * law.v().eval(t);
}

double survival(const MdtParams& law, double u) {
  if (std::isnan(u)) throw DomainError("survival at NaN");
  if (u <= law.u_star()) return 1.0;
  if (std::isinf(u)) return 0.0;
  const double t = std::log(u);
  if (law.is_pareto()) return std::exp(-law.beta() * (t - law.log_u_star()));
  return std::exp(law.log_tail(t) - law.log_tail_at_star());
}

double quantile(const MdtParams& law, double q) {
  if (!(q > 0.0 && q <= 1.0)) throw DomainError("quantile level must lie in (0, 1]");
  if (q == 1.0) return law.u_star();
  const double log_q = std::log(q);
  const double t_star = law.log_u_star();
  if (law.is_pareto()) return std::exp(t_star - log_q / law.beta());

  // Solve log_tail(t) - log_tail_star = ln q on the log-u axis; the left side
  // is decreasing in t past the activation point.
  const double target = law.log_tail_at_star() + log_q;
  auto f = [&](double t) { return law.log_tail(t) - target; };

  double lo = t_star;
  double step = std::max(1.0, -log_q / law.beta());
  double hi = t_star + step;
  while (f(hi) > 0.0) {
    lo = hi;
    step *= 2.0;
    hi = t_star + step;
    if (!std::isfinite(hi) || step > 1e300) throw NumericError("quantile bracket did not close");
  }

  double t = std::clamp(t_star - log_q / law.beta(), lo, hi);
  for (int it = 0; it < kMaxRootIterations; ++it) {
    const double ft = f(t);
    if (ft == 0.0) return std::exp(t);
    (ft > 0.0 ? lo : hi) = t;
    const double slope = law.log_tail_slope(t);
    double next = slope < 0.0 ? t - ft / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - t) <= 2e-16 * std::fabs(t) || hi - lo <= 4e-16 * hi) return std::exp(next);
    t = next;
  }
  std::ostringstream msg;
  msg << "quantile root finder did not converge: q=" << q << " bracket ln u in [" << lo << ", " << hi
      << "], residual " << f(t);
  throw NumericError(msg.str());
}

SampleBatch sample(const MdtParams& law, std::uint64_t seed, std::size_t n) {
  if (n == 0) throw DomainError("sample size must be >= 1");
  const CounterStream stream(seed);
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = draw_from_bits(law, stream.bits(i));
  return SampleBatch{seed, std::move(values), law};
}

void write_csv(std::ostream& os, const SampleBatch& batch) {
  const MdtParams& law = batch.law;
  os.precision(17);
  os << "# beta=" << law.beta() << " gamma=" << law.gamma() << " v=" << law.v().to_string()
     << " u_star=" << law.u_star() << "\n";
  os << "# seed=" << batch.seed << " n=" << batch.values.size() << "\n";
  os << "value\n";
  for (double x : batch.values) os << x << "\n";
}

}  // namespace mdt
