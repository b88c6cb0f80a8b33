#include "mdt/moments.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "mdt/errors.hpp"
#include "mdt/quadrature.hpp"

namespace mdt {

ThetaRegime ThetaRegime::of(const MdtParams& law) {
  const double g1 = law.gamma() + 1.0;
  const Regime tag = g1 > 0.0 ? Regime::A : (g1 == 0.0 ? Regime::B : Regime::C);
  return ThetaRegime{tag, law};
}

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::A:
      return "A";
    case Regime::B:
      return "B";
    case Regime::C:
      return "C";
  }
  return "?";
}

MomentValue raw_moment(const MdtParams& law, double p, double delta_p) {
  const double gap = law.beta() - p;
  // Grid end points computed as beta - delta_p may land a few ulps short.
  if (!(p >= 0.0) || !(gap >= delta_p * (1.0 - 1e-9))) {
    std::ostringstream msg;
    msg << "moment order p=" << p << " outside [0, beta - " << delta_p << "] with beta=" << law.beta();
    throw DomainError(msg.str());
  }
  if (p == 0.0) return {1.0, 0.0};

  // E|xi|^p = u*^p + p * int_{t*}^inf exp(p t + L(t) - L*) dt, L = log tail.
  // With s = (beta - p)(t - t*):
  //   E|xi|^p = u*^p [1 + p/gap * int_0^inf exp(-s + gamma ln(t/t*) + ln V(t)/V(t*)) ds].
  const double t_star = law.log_u_star();
  const double log_v_star = std::log(law.v().eval(t_star));
  const double gamma = law.gamma();
  auto integrand = [&](double s) {
    const double t = t_star + s / gap;
    return std::exp(-s + gamma * std::log1p(s / (gap * t_star)) + std::log(law.v().eval(t)) - log_v_star);
  };

  double total = 0.0;
  double error = 0.0;
  double a = 0.0;
  double b = 1.0;
  const double s_floor = 64.0 + 2.0 * std::max(0.0, gamma);
  for (int panel = 0; panel < 64; ++panel) {
    const quad::Result r = quad::integrate(integrand, a, b, 1e-11, 1e-300);
    if (!r.converged) {
      std::ostringstream msg;
      msg << "moment quadrature did not converge on panel [" << a << ", " << b << "] (p=" << p
          << "): estimate " << r.value << " +- " << r.error;
      throw NumericError(msg.str());
    }
    total += r.value;
    error += r.error;
    if (b >= s_floor && r.value <= 1e-17 * total) break;
    a = b;
    b *= 2.0;
    if (panel == 63) throw NumericError("moment tail integral did not decay");
  }
  const double scale = std::exp(p * t_star);
  const double factor = p / gap;
  return {scale * (1.0 + factor * total), scale * factor * error};
}

MomentValue moment_from_tail(const MdtParams& law, double p, double delta_p) {
  if (!(p >= 2.0)) throw DomainError("moment order must be >= 2");
  return raw_moment(law, p, delta_p);
}

double theta(const ThetaRegime& regime, double p) {
  const double beta = regime.law.beta();
  if (!(p < beta)) throw DomainError("theta requires p < beta");
  if (!(p >= 2.0)) throw DomainError("theta requires p >= 2");
  const double gap = beta - p;
  const double v = regime.law.v().eval(1.0 / gap);
  double value = 0.0;
  switch (regime.tag) {
    case Regime::A:
      value = std::pow(gap, -regime.law.gamma() - 1.0) * v;
      break;
    case Regime::B:
      value = std::fabs(std::log(gap)) * v;
      break;
    case Regime::C:
      value = v;
      break;
  }
  return std::max(value, kThetaMin);
}

double natural_psi(const ThetaRegime& regime, double p) { return std::pow(theta(regime, p), 1.0 / p); }

std::optional<double> regime_a_constant(const ThetaRegime& regime) {
  if (regime.tag != Regime::A) return std::nullopt;
  return std::tgamma(regime.law.gamma() + 1.0);
}

MomentCurve moment_curve(const MdtParams& law, const std::vector<double>& p_grid, double delta_p) {
  MomentCurve c;
  for (double p : p_grid) {
    const MomentValue m = moment_from_tail(law, p, delta_p);
    c.p.push_back(p);
    c.moment.push_back(m.value);
    c.quad_error.push_back(m.error);
  }
  return c;
}

EquivalenceReport verify_equivalence(const MdtParams& law, const std::vector<double>& p_grid, double threshold,
                                     double delta_p) {
  if (p_grid.empty()) throw DomainError("empty p grid");
  const ThetaRegime regime = ThetaRegime::of(law);
  EquivalenceReport rep;
  rep.regime = regime.tag;
  rep.threshold = threshold;
  rep.gamma_constant = regime_a_constant(regime);
  for (double p : p_grid) {
    const MomentValue m = moment_from_tail(law, p, delta_p);
    const double th = theta(regime, p);
    rep.p.push_back(p);
    rep.moment.push_back(m.value);
    rep.theta.push_back(th);
    rep.ratio.push_back(m.value / th);
    rep.quad_error.push_back(m.error);
  }
  rep.min_ratio = *std::min_element(rep.ratio.begin(), rep.ratio.end());
  rep.max_ratio = *std::max_element(rep.ratio.begin(), rep.ratio.end());
  const auto last = std::max_element(rep.p.begin(), rep.p.end()) - rep.p.begin();
  rep.limiting_ratio = rep.ratio[static_cast<std::size_t>(last)];
  rep.pass = rep.min_ratio > 0.0 && rep.max_ratio / rep.min_ratio <= threshold;
  return rep;
}

std::vector<double> linear_grid(double lo, double hi, std::size_t points) {
  if (points == 0) return {};
  if (points == 1) return {lo};
  std::vector<double> g(points);
  for (std::size_t i = 0; i < points; ++i) {
    g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  g.back() = hi;
  return g;
}

void write_csv(std::ostream& os, const EquivalenceReport& report) {
  os.precision(17);
  os << "p,moment,theta,ratio,quad_error\n";
  for (std::size_t i = 0; i < report.p.size(); ++i) {
    os << report.p[i] << "," << report.moment[i] << "," << report.theta[i] << "," << report.ratio[i] << ","
       << report.quad_error[i] << "\n";
  }
}

}  // namespace mdt
