#include "mdt/gls.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "mdt/errors.hpp"

namespace mdt {

const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::AnalyticTheta:
      return "analytic-theta";
    case Provenance::Empirical:
      return "empirical";
    case Provenance::CustomGrid:
      return "custom-grid";
  }
  return "?";
}

GeneratingFunction::GeneratingFunction(double b, std::function<double(double)> psi, Provenance provenance,
                                       double delta_p)
    : b_(b), delta_p_(delta_p), psi_(std::move(psi)), provenance_(provenance) {
  if (!std::isfinite(b) || !(b > 2.0 + delta_p)) {
    throw DomainError("generating function needs a finite domain end b > 2 + delta_p");
  }
  if (!(delta_p > 0.0)) throw DomainError("delta_p must be positive");
}

GeneratingFunction GeneratingFunction::constant(double value, double b, double delta_p) {
  if (!(value > 0.0) || !std::isfinite(value)) throw DomainError("constant psi must be positive");
  return GeneratingFunction(b, [value](double) { return value; }, Provenance::CustomGrid, delta_p);
}

GeneratingFunction GeneratingFunction::analytic_theta(const ThetaRegime& regime, double delta_p) {
  return GeneratingFunction(
      regime.law.beta(), [regime](double p) { return natural_psi(regime, p); }, Provenance::AnalyticTheta,
      delta_p);
}

GeneratingFunction GeneratingFunction::from_grid(std::vector<double> p, std::vector<double> psi, double b,
                                                 Provenance provenance, double delta_p) {
  if (p.empty() || p.size() != psi.size()) throw DomainError("grid generating function: size mismatch");
  if (!std::is_sorted(p.begin(), p.end()) || std::adjacent_find(p.begin(), p.end()) != p.end()) {
    throw DomainError("grid generating function: p must be strictly increasing");
  }
  std::vector<double> log_psi(psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) {
    if (!(psi[i] > 0.0) || !std::isfinite(psi[i])) throw DomainError("grid generating function: psi <= 0");
    log_psi[i] = std::log(psi[i]);
  }
  auto eval = [p = std::move(p), log_psi = std::move(log_psi)](double x) {
    if (x <= p.front()) return std::exp(log_psi.front());
    if (x >= p.back()) return std::exp(log_psi.back());
    const auto hi = static_cast<std::size_t>(std::upper_bound(p.begin(), p.end(), x) - p.begin());
    const std::size_t lo = hi - 1;
    if (x == p[lo]) return std::exp(log_psi[lo]);
    const double w = (x - p[lo]) / (p[hi] - p[lo]);
    return std::exp(log_psi[lo] + w * (log_psi[hi] - log_psi[lo]));
  };
  return GeneratingFunction(b, std::move(eval), provenance, delta_p);
}

GeneratingFunction GeneratingFunction::natural(const MomentCurve& curve, double b, double delta_p) {
  std::vector<double> psi(curve.p.size());
  for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = std::pow(curve.moment[i], 1.0 / curve.p[i]);
  return from_grid(curve.p, std::move(psi), b, Provenance::CustomGrid, delta_p);
}

double GeneratingFunction::operator()(double p) const {
  if (!(p >= 2.0) || !(p < b_)) {
    std::ostringstream msg;
    msg << "generating function evaluated at p=" << p << " outside [2, " << b_ << ")";
    throw DomainError(msg.str());
  }
  const double v = psi_(p);
  if (!(v > 0.0) || !std::isfinite(v)) {
    std::ostringstream msg;
    msg << "generating function value " << v << " at p=" << p << " is not positive and finite";
    throw DomainError(msg.str());
  }
  return v;
}

NormValue gls_norm_from_moments(const MomentCurve& curve, const GeneratingFunction& psi) {
  if (curve.p.empty()) throw DomainError("empty moment grid");
  NormValue best{-1.0, 0.0};
  for (std::size_t i = 0; i < curve.p.size(); ++i) {
    const double r = std::pow(curve.moment[i], 1.0 / curve.p[i]) / psi(curve.p[i]);
    if (r > best.value) best = {r, curve.p[i]};
  }
  return best;
}

NormValue gls_norm_empirical(std::span<const double> values, const GeneratingFunction& psi,
                             const std::vector<double>& p_grid) {
  if (values.size() < 1000) throw DomainError("empirical GLS norm needs at least 1000 values");
  if (p_grid.empty()) throw DomainError("empty p grid");
  std::vector<double> log_abs(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) log_abs[i] = std::log(std::fabs(values[i]));
  NormValue best{-1.0, 0.0};
  const double n = static_cast<double>(values.size());
  for (double p : p_grid) {
    double sum = 0.0;
    for (double la : log_abs) sum += std::exp(p * la);
    const double r = std::pow(sum / n, 1.0 / p) / psi(p);
    if (r > best.value) best = {r, p};
  }
  return best;
}

NormValue gls_norm_empirical(const SampleBatch& batch, const GeneratingFunction& psi,
                             const std::vector<double>& p_grid) {
  return gls_norm_empirical(std::span<const double>(batch.values), psi, p_grid);
}

std::vector<double> empirical_p_grid(const GeneratingFunction& psi, double beta, std::size_t points,
                                     std::optional<double> cap) {
  const double hi = cap ? std::min(*cap, psi.upper()) : std::min(psi.upper(), beta - 0.5);
  if (!(hi >= 2.0)) throw DomainError("empirical p grid is empty (cap below 2)");
  return linear_grid(2.0, hi, points);
}

std::vector<double> fenchel_grid(const GeneratingFunction& psi) {
  const double span = psi.b() - 2.0;
  const double ratio = psi.delta_p() / span;
  std::vector<double> grid(kFenchelGridPoints);
  for (std::size_t k = 0; k < kFenchelGridPoints; ++k) {
    const double gap = span * std::pow(ratio, static_cast<double>(k) / (kFenchelGridPoints - 1));
    grid[k] = psi.b() - gap;
  }
  grid.front() = 2.0;
  grid.back() = psi.upper();
  return grid;
}

namespace {

// Golden-section maximisation of a unimodal objective on [lo, hi].
template <class F>
FenchelPoint golden_max(F&& objective, double lo, double hi) {
  constexpr double kInvPhi = 0.6180339887498948482;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = objective(x1);
  double f2 = objective(x2);
  while (hi - lo > 1e-10) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = objective(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = objective(x1);
    }
  }
  FenchelPoint out{f1, x1};
  if (f2 > out.value) out = {f2, x2};
  for (double p : {lo, hi}) {
    const double v = objective(p);
    if (v > out.value) out = {v, p};
  }
  return out;
}

}  // namespace

FenchelPoint fenchel(const GeneratingFunction& psi, double y) {
  if (!std::isfinite(y)) throw DomainError("Fenchel transform at non-finite y");
  auto objective = [&](double p) { return p * y - psi.nu(p); };

  const std::vector<double> grid = fenchel_grid(psi);
  std::vector<double> values(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) values[k] = objective(grid[k]);

  FenchelPoint out{values[0], grid[0]};
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (values[k] > out.value) out = {values[k], grid[k]};
  }
  // Refine every local maximum of the grid on its two neighbouring cells;
  // a non-concave objective can hide the supremum next to a lower grid peak.
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const bool left_ok = k == 0 || values[k] >= values[k - 1];
    const bool right_ok = k + 1 == grid.size() || values[k] >= values[k + 1];
    if (!left_ok || !right_ok) continue;
    const double lo = grid[k == 0 ? 0 : k - 1];
    const double hi = grid[k + 1 == grid.size() ? k : k + 1];
    const FenchelPoint local = golden_max(objective, lo, hi);
    if (local.value > out.value) out = local;
  }
  return out;
}

double tail_from_gls(const GeneratingFunction& psi, double k, double z) {
  if (!(k > 0.0) || !std::isfinite(k)) throw DomainError("GLS norm value must be positive and finite");
  if (!(z / k >= std::numbers::e)) throw DomainError("tail_from_gls requires z / k >= e");
  const double bound = std::exp(-fenchel(psi, std::log(z / k)).value);
  return std::clamp(bound, 0.0, 1.0);
}

FenchelCurve fenchel_curve(const GeneratingFunction& psi, const std::vector<double>& y_grid) {
  FenchelCurve c;
  for (double y : y_grid) {
    const FenchelPoint f = fenchel(psi, y);
    c.y.push_back(y);
    c.nu_star.push_back(f.value);
    c.p_star.push_back(f.argmax);
  }
  return c;
}

void write_csv(std::ostream& os, const FenchelCurve& curve) {
  os.precision(17);
  os << "y,nu_star,p_star\n";
  for (std::size_t i = 0; i < curve.y.size(); ++i) {
    os << curve.y[i] << "," << curve.nu_star[i] << "," << curve.p_star[i] << "\n";
  }
}

}  // namespace mdt
