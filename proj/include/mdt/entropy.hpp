#pragma once

// Metric entropy, the entropic integral I(N) = int_0^C5 N(eps)^((gamma+1)/beta) d eps,
// and tail bounds for sup_z |Y_n(z)| of random fields on [0, 1].
//
// Reference field: eta(z) = sum_j a_j xi_j cos(2 pi j z + U_j) with xi_j
// i.i.d. MDT and U_j i.i.d. uniform phases on [0, 2 pi).

#include <functional>
#include <optional>
#include <vector>

#include "mdt/distribution.hpp"
#include "mdt/sum_bounds.hpp"

namespace mdt {

struct HolderParams {
  double d = 1.0;
  double alpha = 1.0;
  double c9 = 1.0;
  double c10 = 1.0;
};

class MetricEntropyModel {
 public:
  /// N(eps) = C10 eps^(-d/alpha); requires N(C5) >= 1.
  static MetricEntropyModel holder(const HolderParams& h, double c5);
  /// Arbitrary nonincreasing covering function on (0, C5].
  static MetricEntropyModel custom(double c5, std::function<double(double)> covering);
  /// N == 1.
  static MetricEntropyModel singleton(double c5);

  double c5() const { return c5_; }
  double covering(double eps) const;
  const std::optional<HolderParams>& holder_params() const { return holder_; }

 private:
  MetricEntropyModel(double c5, std::function<double(double)> n, std::optional<HolderParams> h)
      : c5_(c5), n_(std::move(n)), holder_(h) {}
  double c5_;
  std::function<double(double)> n_;
  std::optional<HolderParams> holder_;
};

struct EntropyIntegral {
  double value = 0.0;  // +inf when divergent
  double error = 0.0;
  bool finite() const;
};

/// Requires gamma > -1.
EntropyIntegral entropy_integral(const MetricEntropyModel& model, double beta, double gamma);

/// beta / (gamma + 1) > d / alpha. Requires gamma > -1.
bool check_entropy_condition(double d, double alpha, double beta, double gamma);

class FieldModel {
 public:
  /// Computes the marginal GLS norm ||xi|| against the theta generating
  /// function once at construction.
  static FieldModel create(const MdtParams& marginal, std::vector<double> weights, std::size_t grid_points);

  const MdtParams& marginal() const { return marginal_; }
  const std::vector<double>& weights() const { return weights_; }
  std::size_t grid_points() const { return grid_points_; }
  double marginal_norm() const { return marginal_norm_; }

  /// sum_j |a_j|
  double weight_l1() const;
  /// sum_j 2 pi j |a_j|: pathwise Lipschitz constant per unit |xi|.
  double lipschitz_weight() const;

  /// z_m = m / M, m = 0..M-1.
  std::vector<double> z_grid() const;

  FieldModel with_grid_points(std::size_t m) const;

 private:
  FieldModel(MdtParams marginal) : marginal_(std::move(marginal)) {}
  MdtParams marginal_;
  std::vector<double> weights_;
  std::size_t grid_points_ = 1;
  double marginal_norm_ = 0.0;
};

/// ||xi|| * sum_j |a_j| min(2, 2 pi j |z1 - z2|): an upper bound on the
/// natural semi-distance, itself a semi-distance.
double natural_distance_bound(const FieldModel& model, double z1, double z2);

enum class FieldConstantMode { PessimisticAnalytic, Calibrated };

struct UniformBound {
  double value = 1.0;
  double c6 = 0.0;
};

/// Pessimistic C6 = C1 * (1 + I/C5)^beta, C1 the scalar closed-form constant.
double pessimistic_c6(const MetricEntropyModel& entropy, const SumBoundModel& scalar);

/// min(1, C6 u^-beta (ln u)^(gamma+1) V(ln u)), u >= e. Throws
/// PreconditionError when the entropic integral diverges.
UniformBound uniform_tail_bound(const MetricEntropyModel& entropy, const SumBoundModel& scalar, double u,
                                std::optional<double> c6 = std::nullopt);

struct NetUnionBound {
  double value = 1.0;
  double union_term = 0.0;
  double lipschitz_term = 0.0;
};

/// M * P(|Y_n(z)| > u/2) + P(L_n > u / (2 mesh)) with both terms bounded by
/// Markov on the Rosenthal envelope, L_n = sum_j 2 pi j (|C_j| + |S_j|) the
/// pathwise Lipschitz constant. Default mesh 1/M.
NetUnionBound finite_net_union_bound(const FieldModel& model, const SumMomentEnvelope& envelope, double u,
                                     std::size_t net_size, std::optional<double> mesh = std::nullopt);

TailCurve uniform_field_curve(const MetricEntropyModel& entropy, const SumBoundModel& scalar,
                              std::optional<double> c6 = std::nullopt);
TailCurve net_union_curve(const FieldModel& model, const SumMomentEnvelope& envelope);

}  // namespace mdt
