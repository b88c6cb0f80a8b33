#pragma once

// Moments of MDT laws from their tails, the auxiliary envelope theta in its
// three regimes, and the moment/envelope equivalence check near p = beta.

#include <iosfwd>
#include <optional>
#include <vector>

#include "mdt/distribution.hpp"

namespace mdt {

/// Minimum gap between a moment order and beta.
inline constexpr double kDeltaP = 1e-3;
/// Floor applied to theta before roots and logs.
inline constexpr double kThetaMin = 1e-8;

enum class Regime { A, B, C };  // gamma > -1, gamma == -1, gamma < -1

struct ThetaRegime {
  Regime tag;
  MdtParams law;

  static ThetaRegime of(const MdtParams& law);
};

const char* regime_name(Regime r);

struct MomentValue {
  double value = 0.0;
  double error = 0.0;  // absolute quadrature error estimate
};

/// E|xi|^p for p in [2, beta - delta_p].
MomentValue moment_from_tail(const MdtParams& law, double p, double delta_p = kDeltaP);

/// Same integral for any p in [0, beta - delta_p]; p = 0 gives the total
/// mass. Diagnostic use only.
MomentValue raw_moment(const MdtParams& law, double p, double delta_p = kDeltaP);

double theta(const ThetaRegime& regime, double p);

/// theta(p)^(1/p).
double natural_psi(const ThetaRegime& regime, double p);

/// Gamma(gamma + 1) for regime A, nullopt otherwise. Reported only.
std::optional<double> regime_a_constant(const ThetaRegime& regime);

struct MomentCurve {
  std::vector<double> p;
  std::vector<double> moment;
  std::vector<double> quad_error;
};

MomentCurve moment_curve(const MdtParams& law, const std::vector<double>& p_grid,
                         double delta_p = kDeltaP);

struct EquivalenceReport {
  Regime regime = Regime::A;
  std::vector<double> p, moment, theta, ratio, quad_error;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  double threshold = 50.0;
  bool pass = false;
  /// Ratio at the largest grid point (empirical limiting constant).
  double limiting_ratio = 0.0;
  std::optional<double> gamma_constant;
};

/// PASS iff max ratio / min ratio <= threshold over the grid.
EquivalenceReport verify_equivalence(const MdtParams& law, const std::vector<double>& p_grid,
                                     double threshold = 50.0, double delta_p = kDeltaP);

/// Grid of `points` values from lo to hi inclusive.
std::vector<double> linear_grid(double lo, double hi, std::size_t points);

/// Columns: p, moment, theta, ratio, quad_error.
void write_csv(std::ostream& os, const EquivalenceReport& report);

}  // namespace mdt
