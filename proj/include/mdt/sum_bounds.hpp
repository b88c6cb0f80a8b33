#pragma once

// Uniform-in-n tail bounds for S_n = n^{-1/2} (xi_1 + ... + xi_n).
//
// Moment route: Rosenthal-type envelope for sup_n E|S_n|^p, folded into the
// theta envelope via C_1 = sup_p envelope(p) / theta(p), then optimized
// Chebyshev (Fenchel) over p. Closed forms per regime:
//   A: C u^{-beta} (ln u)^{gamma+1} V(ln u)
//   B: C u^{-beta} ln ln u V(ln u)          (u >= e^e)
//   C: C u^{-beta} V(ln u)                  (needs V -> 0)
// Lower witness: the n = 1 tail itself.

#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "mdt/distribution.hpp"
#include "mdt/gls.hpp"
#include "mdt/moments.hpp"

namespace mdt {

/// K_R(p) = (c0 * p / ln max(p, 2))^p.
struct RosenthalModel {
  double c0 = 2.0;
  double constant(double p) const;
};

/// K_R(p) * max(moment2^(p/2), momentp).
double rosenthal_sum_moment(double p, double moment2, double momentp, const RosenthalModel& model = {});

class SumMomentEnvelope {
 public:
  /// Tabulates moments on a grid over [2, beta - delta_p], dense toward
  /// beta; regime B grids also contain p = beta - 1 where theta is floored.
  static SumMomentEnvelope build(const MdtParams& law, const RosenthalModel& rosenthal = {},
                                 std::size_t points = 240, double delta_p = kDeltaP);

  const MdtParams& law() const { return law_; }
  const RosenthalModel& rosenthal() const { return rosenthal_; }
  double moment2() const { return moment2_; }
  const std::vector<double>& p() const { return p_; }
  const std::vector<double>& moment() const { return moment_; }
  const std::vector<double>& envelope() const { return envelope_; }

  /// sup over the grid of envelope(p) / theta(p).
  double c1() const;

  /// min(1, inf over the grid of (scale)^p envelope(p) / u^p): a Markov
  /// bound for sup_n P(|S_n| > u) of the summand scale * xi.
  double markov_bound(double u, double scale = 1.0) const;

 private:
  SumMomentEnvelope(MdtParams law) : law_(std::move(law)) {}
  MdtParams law_;
  RosenthalModel rosenthal_;
  double moment2_ = 0.0;
  std::vector<double> p_, moment_, envelope_;
};

enum class ConstantMode { PessimisticAnalytic, Calibrated };

const char* constant_mode_name(ConstantMode m);

/// Explicit constants of both bound forms for one law.
struct SumBoundModel {
  MdtParams law;
  ConstantMode mode = ConstantMode::PessimisticAnalytic;
  double c1_sum = 1.0;           // sup_n E|S_n|^p <= c1_sum * theta(p)
  double closed_constant = 1.0;  // C1 / C2 / C3 by regime

  /// c1_sum from the Rosenthal envelope; closed_constant as the smallest
  /// constant dominating the Fenchel bound on ln u in [start, 60].
  static SumBoundModel pessimistic(const SumMomentEnvelope& envelope);
  /// Explicit constants (configuration overrides).
  static SumBoundModel with_constants(const MdtParams& law, double c1_sum, double closed_constant,
                                      ConstantMode mode = ConstantMode::PessimisticAnalytic);
};

/// First u of the closed form's domain: e, or e^e in regime B.
double closed_domain_start(const MdtParams& law);

/// Closed-form shape without the constant, and its logarithm.
double closed_shape(const MdtParams& law, double u);
double closed_log_shape(const MdtParams& law, double u);

struct FenchelBound {
  double value = 1.0;
  double shift = 1.0;   // C_shift = c1_sum^(1/p*)
  double p_star = 2.0;  // active argmax
  bool converged = false;
};

/// exp(-tau*(ln(u / C_shift))) clamped to [0, 1], tau = ln theta. The shift
/// is solved as a fixed point C_shift = c1_sum^(1/p*) at the active argmax.
FenchelBound q_bound_fenchel_detail(const SumBoundModel& model, double u);
double q_bound_fenchel(const SumBoundModel& model, double u);

double q_bound_closed(const SumBoundModel& model, double u);

/// survival(u) for u >= u_star.
double lower_witness(const MdtParams& law, double u);

enum class CurveKind {
  FenchelThm21,
  ClosedEx1,
  ClosedEx2,
  ClosedEx3,
  Empirical,
  LowerWitness,
  UniformField,
  NetUnion
};

const char* curve_kind_name(CurveKind k);

class TailCurve {
 public:
  TailCurve(CurveKind kind, std::function<double(double)> f, double activation,
            std::map<std::string, double> constants = {});

  /// 1 below the activation point (in unscaled units), f otherwise, in [0, 1].
  double operator()(double u) const;

  /// Curve of lambda * xi: u -> this(u / lambda).
  TailCurve rescaled(double lambda) const;

  CurveKind kind() const { return kind_; }
  bool is_lower() const { return kind_ == CurveKind::LowerWitness; }
  double activation() const { return activation_; }
  double scale() const { return scale_; }
  const std::map<std::string, double>& constants() const { return constants_; }

 private:
  CurveKind kind_;
  std::function<double(double)> f_;
  double activation_;
  double scale_ = 1.0;
  std::map<std::string, double> constants_;
};

TailCurve fenchel_curve(const SumBoundModel& model);
TailCurve closed_curve(const SumBoundModel& model);
TailCurve lower_witness_curve(const MdtParams& law);

/// Columns u, bound, provenance; the constants as a JSON object in a
/// '#'-prefixed header line.
void write_csv(std::ostream& os, const TailCurve& curve, const std::vector<double>& u_grid);

/// Smallest constant C with min(1, C * shape(u)) >= min(1, target(u)) on the
/// grid, for a shape that is linear in C.
double calibrate_linear(const std::vector<double>& u_grid, const std::vector<double>& target,
                        const std::function<double(double)>& shape);

/// Calibrated closed form: dominates min(1, qhat + slack) on the grid.
SumBoundModel calibrate_closed(const SumBoundModel& base, const std::vector<double>& u_grid,
                               const std::vector<double>& qhat, double slack);

/// Calibrated Fenchel form: smallest c1_sum (bisection on ln c1_sum) making
/// the Fenchel bound dominate min(1, qhat + slack) on the grid.
SumBoundModel calibrate_fenchel(const SumBoundModel& base, const std::vector<double>& u_grid,
                                const std::vector<double>& qhat, double slack);

}  // namespace mdt
