#include "mdt/sum_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "mdt/errors.hpp"

namespace mdt {

double RosenthalModel::constant(double p) const {
  return std::pow(c0 * p / std::log(std::max(p, 2.0)), p);
}

double rosenthal_sum_moment(double p, double moment2, double momentp, const RosenthalModel& model) {
  if (!(moment2 > 0.0) || !(momentp > 0.0)) throw DomainError("Rosenthal bound needs positive moments");
  return model.constant(p) * std::max(std::pow(moment2, 0.5 * p), momentp);
}

SumMomentEnvelope SumMomentEnvelope::build(const MdtParams& law, const RosenthalModel& rosenthal,
                                           std::size_t points, double delta_p) {
  if (points < 2) throw DomainError("envelope grid needs at least 2 points");
  const double beta = law.beta();
  if (!(beta - delta_p > 2.0)) throw DomainError("beta too close to 2 for the envelope grid");
  SumMomentEnvelope env(law);
  env.rosenthal_ = rosenthal;

  const double span = beta - 2.0;
  const double ratio = delta_p / span;
  for (std::size_t k = 0; k < points; ++k) {
    env.p_.push_back(beta - span * std::pow(ratio, static_cast<double>(k) / static_cast<double>(points - 1)));
  }
  env.p_.front() = 2.0;
  env.p_.back() = beta - delta_p;
  if (ThetaRegime::of(law).tag == Regime::B && beta - 1.0 >= 2.0) {
    env.p_.insert(std::upper_bound(env.p_.begin(), env.p_.end(), beta - 1.0), beta - 1.0);
    env.p_.erase(std::unique(env.p_.begin(), env.p_.end()), env.p_.end());
  }

  env.moment2_ = moment_from_tail(law, 2.0, delta_p).value;
  for (double p : env.p_) {
    const double m = p == 2.0 ? env.moment2_ : moment_from_tail(law, p, delta_p).value;
    env.moment_.push_back(m);
    env.envelope_.push_back(rosenthal_sum_moment(p, env.moment2_, m, rosenthal));
  }
  return env;
}

double SumMomentEnvelope::c1() const {
  const ThetaRegime regime = ThetaRegime::of(law_);
  double c = 0.0;
  for (std::size_t i = 0; i < p_.size(); ++i) c = std::max(c, envelope_[i] / theta(regime, p_[i]));
  return c;
}

double SumMomentEnvelope::markov_bound(double u, double scale) const {
  if (!(u > 0.0)) return 1.0;
  if (!(scale > 0.0)) throw DomainError("Markov bound scale must be positive");
  double best = 0.0;  // log of the bound
  const double log_ratio = std::log(scale) - std::log(u);
  for (std::size_t i = 0; i < p_.size(); ++i) best = std::min(best, std::log(envelope_[i]) + p_[i] * log_ratio);
  return std::exp(best);
}

const char* constant_mode_name(ConstantMode m) {
  return m == ConstantMode::Calibrated ? "calibrated" : "pessimistic-analytic";
}

double closed_domain_start(const MdtParams& law) {
  return ThetaRegime::of(law).tag == Regime::B ? std::exp(std::numbers::e) : std::numbers::e;
}

double closed_log_shape(const MdtParams& law, double u) {
  const ThetaRegime regime = ThetaRegime::of(law);
  if (regime.tag == Regime::C && !limit_at_infinity_is_zero(law.v())) {
    throw PreconditionError("closed-form bound for gamma < -1 requires V(u) -> 0 at infinity");
  }
  const double start = closed_domain_start(law);
  if (!(u >= start) || !std::isfinite(u)) {
    std::ostringstream msg;
    msg << "closed-form bound requires u >= " << start << " (got " << u << ")";
    throw DomainError(msg.str());
  }
  const double t = std::log(u);
  const double base = -law.beta() * t + std::log(law.v().eval(t));
  switch (regime.tag) {
    case Regime::A:
      return base + (law.gamma() + 1.0) * std::log(t);
    case Regime::B:
      return base + std::log(std::log(t));
    case Regime::C:
      return base;
  }
  return base;
}

double closed_shape(const MdtParams& law, double u) { return std::exp(closed_log_shape(law, u)); }

double q_bound_closed(const SumBoundModel& model, double u) {
  return std::clamp(std::exp(std::log(model.closed_constant) + closed_log_shape(model.law, u)), 0.0, 1.0);
}

FenchelBound q_bound_fenchel_detail(const SumBoundModel& model, double u) {
  if (!(u >= std::numbers::e) || !std::isfinite(u)) throw DomainError("Fenchel bound requires finite u >= e");
  const GeneratingFunction tau = GeneratingFunction::analytic_theta(ThetaRegime::of(model.law));
  const double y = std::log(u);
  const double log_c1 = std::log(model.c1_sum);

  FenchelBound out;
  FenchelPoint plain = fenchel(tau, y);
  double p = plain.argmax;
  FenchelPoint shifted = plain;
  for (int it = 0; it < 60; ++it) {
    shifted = fenchel(tau, y - log_c1 / p);
    if (std::fabs(shifted.argmax - p) <= 1e-9) {
      out.converged = true;
      p = shifted.argmax;
      break;
    }
    p = shifted.argmax;
  }
  // c1 * exp(-tau*(y)) is the optimized Markov bound itself; at the fixed
  // point the shifted form equals Markov at p*, hence is never smaller.
  const double shifted_value = std::exp(-shifted.value);
  const double markov_value = std::exp(log_c1 - plain.value);
  out.value = std::clamp(std::max(shifted_value, markov_value), 0.0, 1.0);
  out.p_star = p;
  out.shift = std::exp(log_c1 / p);
  return out;
}

double q_bound_fenchel(const SumBoundModel& model, double u) { return q_bound_fenchel_detail(model, u).value; }

double lower_witness(const MdtParams& law, double u) {
  if (!(u >= law.u_star())) throw DomainError("lower witness requires u >= u_star");
  return survival(law, u);
}

SumBoundModel SumBoundModel::with_constants(const MdtParams& law, double c1_sum, double closed_constant,
                                            ConstantMode mode) {
  if (!(c1_sum > 0.0) || !(closed_constant > 0.0)) throw DomainError("bound constants must be positive");
  return SumBoundModel{law, mode, c1_sum, closed_constant};
}

SumBoundModel SumBoundModel::pessimistic(const SumMomentEnvelope& envelope) {
  SumBoundModel m{envelope.law(), ConstantMode::PessimisticAnalytic, envelope.c1(), 1.0};
  const ThetaRegime regime = ThetaRegime::of(m.law);
  if (regime.tag == Regime::C && !limit_at_infinity_is_zero(m.law.v())) {
    m.closed_constant = std::numeric_limits<double>::quiet_NaN();
    return m;
  }
  const double y0 = std::log(closed_domain_start(m.law));
  constexpr double kYMax = 60.0;
  constexpr int kPoints = 240;
  double c = 0.0;
  for (int i = 0; i < kPoints; ++i) {
    const double y = y0 + (kYMax - y0) * i / (kPoints - 1);
    const double u = std::exp(y);
    c = std::max(c, q_bound_fenchel(m, u) / closed_shape(m.law, u));
  }
  m.closed_constant = c;
  return m;
}

const char* curve_kind_name(CurveKind k) {
  switch (k) {
    case CurveKind::FenchelThm21:
      return "fenchel-thm21";
    case CurveKind::ClosedEx1:
      return "closed-form-ex1";
    case CurveKind::ClosedEx2:
      return "closed-form-ex2";
    case CurveKind::ClosedEx3:
      return "closed-form-ex3";
    case CurveKind::Empirical:
      return "empirical";
    case CurveKind::LowerWitness:
      return "lower-witness";
    case CurveKind::UniformField:
      return "uniform-field";
    case CurveKind::NetUnion:
      return "net-union";
  }
  return "?";
}

TailCurve::TailCurve(CurveKind kind, std::function<double(double)> f, double activation,
                     std::map<std::string, double> constants)
    : kind_(kind), f_(std::move(f)), activation_(activation), constants_(std::move(constants)) {}

double TailCurve::operator()(double u) const {
  const double x = u / scale_;
  if (!(x >= activation_)) return 1.0;
  return std::clamp(f_(x), 0.0, 1.0);
}

TailCurve TailCurve::rescaled(double lambda) const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("rescale factor must be positive");
  TailCurve c = *this;
  c.scale_ *= lambda;
  c.constants_["scale"] = c.scale_;
  return c;
}

TailCurve fenchel_curve(const SumBoundModel& model) {
  return TailCurve(
      CurveKind::FenchelThm21, [model](double u) { return q_bound_fenchel(model, u); }, std::numbers::e,
      {{"C1_sum", model.c1_sum}});
}

TailCurve closed_curve(const SumBoundModel& model) {
  const Regime r = ThetaRegime::of(model.law).tag;
  const CurveKind kind = r == Regime::A ? CurveKind::ClosedEx1 : (r == Regime::B ? CurveKind::ClosedEx2 : CurveKind::ClosedEx3);
  const char* name = r == Regime::A ? "C1" : (r == Regime::B ? "C2" : "C3");
  // Surface the precondition error at construction rather than per point.
  closed_shape(model.law, closed_domain_start(model.law));
  return TailCurve(
      kind, [model](double u) { return q_bound_closed(model, u); }, closed_domain_start(model.law),
      {{name, model.closed_constant}});
}

TailCurve lower_witness_curve(const MdtParams& law) {
  return TailCurve(
      CurveKind::LowerWitness, [law](double u) { return lower_witness(law, u); }, law.u_star(),
      {{"u_star", law.u_star()}});
}

void write_csv(std::ostream& os, const TailCurve& curve, const std::vector<double>& u_grid) {
  nlohmann::ordered_json constants(nlohmann::ordered_json::object());
  for (const auto& [k, v] : curve.constants()) constants[k] = v;
  os.precision(17);
  os << "# constants: " << constants.dump() << "\n";
  os << "u,bound,provenance\n";
  for (double u : u_grid) os << u << "," << curve(u) << "," << curve_kind_name(curve.kind()) << "\n";
}

double calibrate_linear(const std::vector<double>& u_grid, const std::vector<double>& target,
                        const std::function<double(double)>& shape) {
  if (u_grid.size() != target.size()) throw DomainError("calibration grid mismatch");
  double c = 0.0;
  for (std::size_t i = 0; i < u_grid.size(); ++i) {
    const double goal = std::min(1.0, target[i]);
    if (!(goal > 0.0)) continue;
    c = std::max(c, goal / shape(u_grid[i]));
  }
  return c > 0.0 ? c : std::numeric_limits<double>::min();
}

namespace {

std::vector<double> slack_target(const std::vector<double>& qhat, double slack) {
  std::vector<double> t(qhat.size());
  for (std::size_t i = 0; i < qhat.size(); ++i) t[i] = std::min(1.0, qhat[i] + slack);
  return t;
}

}  // namespace

SumBoundModel calibrate_closed(const SumBoundModel& base, const std::vector<double>& u_grid,
                               const std::vector<double>& qhat, double slack) {
  const double start = closed_domain_start(base.law);
  std::vector<double> us, target;
  const std::vector<double> goal = slack_target(qhat, slack);
  for (std::size_t i = 0; i < u_grid.size(); ++i) {
    if (u_grid[i] >= start) {
      us.push_back(u_grid[i]);
      target.push_back(goal[i]);
    }
  }
  SumBoundModel m = base;
  m.mode = ConstantMode::Calibrated;
  m.closed_constant = calibrate_linear(us, target, [&](double u) { return closed_shape(base.law, u); });
  return m;
}

SumBoundModel calibrate_fenchel(const SumBoundModel& base, const std::vector<double>& u_grid,
                                const std::vector<double>& qhat, double slack) {
  if (u_grid.size() != qhat.size()) throw DomainError("calibration grid mismatch");
  const std::vector<double> goal = slack_target(qhat, slack);
  auto dominates = [&](double log_c1) {
    SumBoundModel m = base;
    m.c1_sum = std::exp(log_c1);
    for (std::size_t i = 0; i < u_grid.size(); ++i) {
      if (u_grid[i] < std::numbers::e) continue;
      if (q_bound_fenchel(m, u_grid[i]) < goal[i]) return false;
    }
    return true;
  };
  double lo = -50.0;
  double hi = 10.0;
  while (!dominates(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e4) throw NumericError("Fenchel calibration: no constant dominates the target");
  }
  if (dominates(lo)) {
    hi = lo;
  } else {
    for (int it = 0; it < 80 && hi - lo > 1e-12; ++it) {
      const double mid = 0.5 * (lo + hi);
      (dominates(mid) ? hi : lo) = mid;
    }
  }
  SumBoundModel m = base;
  m.mode = ConstantMode::Calibrated;
  m.c1_sum = std::exp(hi);
  return m;
}

}  // namespace mdt
