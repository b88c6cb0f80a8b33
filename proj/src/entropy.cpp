#include "mdt/entropy.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "mdt/errors.hpp"
#include "mdt/gls.hpp"
#include "mdt/moments.hpp"
#include "mdt/quadrature.hpp"

namespace mdt {

MetricEntropyModel MetricEntropyModel::holder(const HolderParams& h, double c5) {
  if (!(h.d >= 1.0) || !(h.alpha > 0.0 && h.alpha <= 1.0) || !(h.c9 > 0.0) || !(h.c10 > 0.0)) {
    throw DomainError("Hoelder model needs d >= 1, alpha in (0, 1], C9 > 0, C10 > 0");
  }
  if (!(c5 > 0.0) || !std::isfinite(c5)) throw DomainError("C5 must be positive and finite");
  const double exponent = h.d / h.alpha;
  if (!(h.c10 * std::pow(c5, -exponent) >= 1.0)) throw DomainError("Hoelder model violates N(C5) >= 1");
  return MetricEntropyModel(
      c5, [c10 = h.c10, exponent](double eps) { return c10 * std::pow(eps, -exponent); }, h);
}

MetricEntropyModel MetricEntropyModel::custom(double c5, std::function<double(double)> covering) {
  if (!(c5 > 0.0) || !std::isfinite(c5)) throw DomainError("C5 must be positive and finite");
  MetricEntropyModel m(c5, std::move(covering), std::nullopt);
  if (!(m.covering(c5) >= 1.0)) throw DomainError("covering number at C5 must be >= 1");
  return m;
}

MetricEntropyModel MetricEntropyModel::singleton(double c5) {
  return custom(c5, [](double) { return 1.0; });
}

double MetricEntropyModel::covering(double eps) const {
  if (!(eps > 0.0) || !(eps <= c5_)) throw DomainError("covering number needs eps in (0, C5]");
  return n_(eps);
}

bool EntropyIntegral::finite() const { return std::isfinite(value); }

namespace {

void require_gamma(double gamma) {
  if (!(gamma > -1.0)) throw PreconditionError("entropic integral requires gamma > -1");
}

// int_0^C5 f(eps) d eps for f ~ eps^-k near 0, k < 1, via eps = C5 s^m,
// m = 1 / (1 - k): the substituted integrand stays bounded at s = 0. The
// integrand is assembled in logs because s^m underflows for k close to 1.
EntropyIntegral integrate_with_substitution(const std::function<double(double)>& log_f, double c5, double k) {
  const double m = 1.0 / (1.0 - std::max(k, 0.0));
  const double log_c5 = std::log(c5);
  auto g = [&](double s) {
    if (s <= 0.0) s = std::numeric_limits<double>::min();
    const double log_s = std::log(s);
    const double v = log_f(log_c5 + m * log_s) + log_c5 + std::log(m) + (m - 1.0) * log_s;
    return std::exp(v);
  };
  const quad::Result r = quad::integrate(g, 0.0, 1.0, 1e-12);
  if (!r.converged) {
    std::ostringstream msg;
    msg << "entropic integral quadrature did not converge: " << r.value << " +- " << r.error;
    throw NumericError(msg.str());
  }
  return {r.value, r.error};
}

}  // namespace

EntropyIntegral entropy_integral(const MetricEntropyModel& model, double beta, double gamma) {
  require_gamma(gamma);
  if (!(beta > 2.0)) throw DomainError("beta must be > 2");
  const double power = (gamma + 1.0) / beta;
  constexpr double kInf = std::numeric_limits<double>::infinity();

  if (const auto& h = model.holder_params()) {
    const double e0 = power * (h->d / h->alpha);
    if (e0 >= 1.0) return {kInf, 0.0};
    const double log_c10 = std::log(h->c10);
    const double slope = h->d / h->alpha;
    return integrate_with_substitution(
        [&](double log_eps) { return power * (log_c10 - slope * log_eps); }, model.c5(), e0);
  }

  auto log_f = [&](double log_eps) {
    const double eps = std::exp(log_eps);
    // Below the smallest double the integrand's share is negligible.
    if (!(eps > 0.0)) return -std::numeric_limits<double>::infinity();
    return power * std::log(model.covering(eps));
  };
  // Local power-law exponent of the integrand at the singular end.
  const double l1 = std::log(model.c5() * 1e-10);
  const double l2 = std::log(model.c5() * 1e-8);
  const double k = (log_f(l1) - log_f(l2)) / (l2 - l1);
  if (!std::isfinite(k) || k >= 1.0 - 1e-9) return {kInf, 0.0};
  return integrate_with_substitution(log_f, model.c5(), k);
}

bool check_entropy_condition(double d, double alpha, double beta, double gamma) {
  require_gamma(gamma);
  if (!(d >= 1.0) || !(alpha > 0.0 && alpha <= 1.0) || !(beta > 2.0)) {
    throw DomainError("entropy condition needs d >= 1, alpha in (0, 1], beta > 2");
  }
  return beta / (gamma + 1.0) > d / alpha;
}

// --- fields -----------------------------------------------------------------

FieldModel FieldModel::create(const MdtParams& marginal, std::vector<double> weights, std::size_t grid_points) {
  if (weights.empty()) throw DomainError("field needs at least one component");
  for (double a : weights) {
    if (!std::isfinite(a)) throw DomainError("field weights must be finite");
  }
  if (grid_points < 1) throw DomainError("field grid needs at least one point");
  FieldModel f(marginal);
  f.weights_ = std::move(weights);
  f.grid_points_ = grid_points;

  const double beta = marginal.beta();
  std::vector<double> grid;
  constexpr std::size_t kPoints = 64;
  const double span = beta - 2.0;
  const double ratio = kDeltaP / span;
  for (std::size_t k = 0; k < kPoints; ++k) {
    grid.push_back(beta - span * std::pow(ratio, static_cast<double>(k) / (kPoints - 1)));
  }
  grid.front() = 2.0;
  grid.back() = beta - kDeltaP;
  const MomentCurve curve = moment_curve(marginal, grid);
  f.marginal_norm_ =
      gls_norm_from_moments(curve, GeneratingFunction::analytic_theta(ThetaRegime::of(marginal))).value;
  return f;
}

double FieldModel::weight_l1() const {
  double s = 0.0;
  for (double a : weights_) s += std::fabs(a);
  return s;
}

double FieldModel::lipschitz_weight() const {
  double s = 0.0;
  for (std::size_t j = 0; j < weights_.size(); ++j) {
    s += 2.0 * std::numbers::pi * static_cast<double>(j + 1) * std::fabs(weights_[j]);
  }
  return s;
}

std::vector<double> FieldModel::z_grid() const {
  std::vector<double> z(grid_points_);
  for (std::size_t m = 0; m < grid_points_; ++m) z[m] = static_cast<double>(m) / static_cast<double>(grid_points_);
  return z;
}

FieldModel FieldModel::with_grid_points(std::size_t m) const {
  if (m < 1) throw DomainError("field grid needs at least one point");
  FieldModel f = *this;
  f.grid_points_ = m;
  return f;
}

double natural_distance_bound(const FieldModel& model, double z1, double z2) {
  if (!(z1 >= 0.0 && z1 <= 1.0) || !(z2 >= 0.0 && z2 <= 1.0)) {
    throw DomainError("natural distance needs points in [0, 1]");
  }
  const double dz = std::fabs(z1 - z2);
  double s = 0.0;
  const auto& w = model.weights();
  for (std::size_t j = 0; j < w.size(); ++j) {
    s += std::fabs(w[j]) * std::min(2.0, 2.0 * std::numbers::pi * static_cast<double>(j + 1) * dz);
  }
  return model.marginal_norm() * s;
}

double pessimistic_c6(const MetricEntropyModel& entropy, const SumBoundModel& scalar) {
  const EntropyIntegral integral = entropy_integral(entropy, scalar.law.beta(), scalar.law.gamma());
  if (!integral.finite()) throw PreconditionError("entropy condition violated: entropic integral diverges");
  return scalar.closed_constant * std::pow(1.0 + integral.value / entropy.c5(), scalar.law.beta());
}

UniformBound uniform_tail_bound(const MetricEntropyModel& entropy, const SumBoundModel& scalar, double u,
                                std::optional<double> c6) {
  const MdtParams& law = scalar.law;
  const EntropyIntegral integral = entropy_integral(entropy, law.beta(), law.gamma());
  if (!integral.finite()) throw PreconditionError("entropy condition violated: entropic integral diverges");
  if (!(u >= std::numbers::e)) throw DomainError("uniform tail bound requires u >= e");
  UniformBound b;
  b.c6 = c6 ? *c6 : pessimistic_c6(entropy, scalar);
  b.value = std::clamp(std::exp(std::log(b.c6) + closed_log_shape(law, u)), 0.0, 1.0);
  return b;
}

NetUnionBound finite_net_union_bound(const FieldModel& model, const SumMomentEnvelope& envelope, double u,
                                     std::size_t net_size, std::optional<double> mesh) {
  if (net_size < 1) throw DomainError("net needs at least one point");
  const double h = mesh ? *mesh : 1.0 / static_cast<double>(net_size);
  if (!(h > 0.0)) throw DomainError("mesh must be positive");
  NetUnionBound b;
  b.union_term = static_cast<double>(net_size) * envelope.markov_bound(0.5 * u, model.weight_l1());
  // C_j and S_j each carry weight |a_j|, hence the factor 2.
  b.lipschitz_term = envelope.markov_bound(u / (2.0 * h), 2.0 * model.lipschitz_weight());
  b.value = std::min(1.0, b.union_term + b.lipschitz_term);
  return b;
}

TailCurve uniform_field_curve(const MetricEntropyModel& entropy, const SumBoundModel& scalar,
                              std::optional<double> c6) {
  const double c = c6 ? *c6 : pessimistic_c6(entropy, scalar);
  return TailCurve(
      CurveKind::UniformField,
      [entropy, scalar, c](double u) { return uniform_tail_bound(entropy, scalar, u, c).value; },
      std::numbers::e, {{"C6", c}});
}

TailCurve net_union_curve(const FieldModel& model, const SumMomentEnvelope& envelope) {
  return TailCurve(
      CurveKind::NetUnion,
      [model, envelope](double u) { return finite_net_union_bound(model, envelope, u, model.grid_points()).value; },
      0.0,
      {{"M", static_cast<double>(model.grid_points())},
       {"weight_l1", model.weight_l1()},
       {"lipschitz_weight", model.lipschitz_weight()}});
}

}  // namespace mdt
