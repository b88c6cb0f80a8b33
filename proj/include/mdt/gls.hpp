#pragma once

// Grand Lebesgue space norms and the regional Young-Fenchel transform
//
//   nu(p)   = p ln psi(p)
//   nu*(y)  = sup_{p in [2, b)} (p y - nu(p))
//   P(|xi| > z) <= exp(-nu*(ln(z / k)))   when ||xi||_{G psi} <= k.
//
// The supremum over the half-open [2, b) is taken over [2, b - delta_p].

#include <cmath>
#include <functional>
#include <optional>
#include <iosfwd>
#include <span>
#include <vector>

#include "mdt/distribution.hpp"
#include "mdt/moments.hpp"

namespace mdt {

enum class Provenance { AnalyticTheta, Empirical, CustomGrid };

const char* provenance_name(Provenance p);

class GeneratingFunction {
 public:
  GeneratingFunction(double b, std::function<double(double)> psi, Provenance provenance,
                     double delta_p = kDeltaP);

  static GeneratingFunction constant(double value, double b, double delta_p = kDeltaP);

  /// psi(p) = theta(p)^(1/p), b = beta.
  static GeneratingFunction analytic_theta(const ThetaRegime& regime, double delta_p = kDeltaP);

  /// Piecewise log-linear interpolation through (p_i, psi_i); constant
  /// beyond the end points.
  static GeneratingFunction from_grid(std::vector<double> p, std::vector<double> psi, double b,
                                      Provenance provenance = Provenance::CustomGrid,
                                      double delta_p = kDeltaP);

  /// The natural function p -> ||xi||_p tabulated from a moment curve.
  static GeneratingFunction natural(const MomentCurve& curve, double b, double delta_p = kDeltaP);

  /// Throws DomainError outside [2, b) or on a non-positive / non-finite value.
  double operator()(double p) const;
  double nu(double p) const { return p * std::log((*this)(p)); }

  double b() const { return b_; }
  double delta_p() const { return delta_p_; }
  /// Right end of the working interval, b - delta_p.
  double upper() const { return b_ - delta_p_; }
  Provenance provenance() const { return provenance_; }

 private:
  double b_;
  double delta_p_;
  std::function<double(double)> psi_;
  Provenance provenance_;
};

struct NormValue {
  double value = 0.0;
  double argsup = 0.0;
};

/// sup over the curve's grid of moment^(1/p) / psi(p).
NormValue gls_norm_from_moments(const MomentCurve& curve, const GeneratingFunction& psi);

/// Plug-in estimate sup_p (mean |x|^p)^(1/p) / psi(p); needs >= 1000 values.
NormValue gls_norm_empirical(std::span<const double> values, const GeneratingFunction& psi,
                             const std::vector<double>& p_grid);
NormValue gls_norm_empirical(const SampleBatch& batch, const GeneratingFunction& psi,
                             const std::vector<double>& p_grid);

/// Default empirical grid: `points` values on [2, min(b - delta_p, beta - 0.5)],
/// or up to `cap` when given.
std::vector<double> empirical_p_grid(const GeneratingFunction& psi, double beta, std::size_t points = 32,
                                     std::optional<double> cap = std::nullopt);

struct FenchelPoint {
  double value = 0.0;
  double argmax = 0.0;
};

inline constexpr std::size_t kFenchelGridPoints = 256;

/// Coarse grid (geometric refinement toward b) followed by golden-section
/// search on the bracketing cell, tolerance 1e-10 in p.
FenchelPoint fenchel(const GeneratingFunction& psi, double y);

/// The coarse grid used by fenchel(); exposed for oracles and tests.
std::vector<double> fenchel_grid(const GeneratingFunction& psi);

/// min(1, exp(-nu*(ln(z/k)))). Requires k > 0 and z / k >= e.
double tail_from_gls(const GeneratingFunction& psi, double k, double z);

struct FenchelCurve {
  std::vector<double> y;
  std::vector<double> nu_star;
  std::vector<double> p_star;
};

FenchelCurve fenchel_curve(const GeneratingFunction& psi, const std::vector<double>& y_grid);

/// Columns: y, nu_star, p_star.
void write_csv(std::ostream& os, const FenchelCurve& curve);

}  // namespace mdt
