#pragma once

// Moderate-decreasing-tail laws.
//
// The tail shape u^{-beta} (ln u)^gamma V(ln u), u >= e, is completed to a
// symmetric law: |xi| has survival 1 on [0, u_star] and
// tail(u) / tail(u_star) beyond, and xi carries an independent fair sign.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "mdt/rng.hpp"
#include "mdt/slowly_varying.hpp"

namespace mdt {

class MdtParams {
 public:
  /// Validates beta > 2 and finiteness. Without an explicit u_star the
  /// activation point is the smallest u >= e after which the tail formula
  /// is <= 1 and nonincreasing. An explicit u_star must be >= e and the
  /// tail must be nonincreasing beyond it.
  static MdtParams create(double beta, double gamma, SlowlyVarying v = {},
                          std::optional<double> u_star = std::nullopt);

  double beta() const { return beta_; }
  double gamma() const { return gamma_; }
  const SlowlyVarying& v() const { return v_; }
  double u_star() const { return u_star_; }
  double log_u_star() const { return t_star_; }

  /// ln of the tail formula at u = e^t (t >= 1).
  double log_tail(double t) const;
  /// d/dt log_tail(t).
  double log_tail_slope(double t) const;
  /// log_tail at the activation point; survival = exp(log_tail - this).
  double log_tail_at_star() const { return log_tail_star_; }

  /// gamma == 0 and V constant: survival is an exact Pareto tail.
  bool is_pareto() const { return pareto_; }

 private:
  MdtParams() = default;
  double beta_ = 0.0;
  double gamma_ = 0.0;
  SlowlyVarying v_;
  double u_star_ = 0.0;
  double t_star_ = 0.0;
  double log_tail_star_ = 0.0;
  bool pareto_ = false;
};

/// u^{-beta} (ln u)^gamma V(ln u) for u >= e.
double tail_formula(const MdtParams& law, double u);

/// P(|xi| > u).
double survival(const MdtParams& law, double u);

/// u with survival(u) == q, q in (0, 1]; q == 1 gives u_star.
double quantile(const MdtParams& law, double q);

/// Signed draw from 64 random bits: magnitude quantile(U), U uniform on
/// (0,1] from the high 53 bits, sign from bit 0.
inline double draw_from_bits(const MdtParams& law, std::uint64_t bits) {
  const double mag = quantile(law, CounterStream::unit_open_closed(bits));
  return (bits & 1U) ? -mag : mag;
}

struct SampleBatch {
  std::uint64_t seed = 0;
  std::vector<double> values;
  MdtParams law;
};

/// n i.i.d. draws; draw i uses counter i of CounterStream(seed).
SampleBatch sample(const MdtParams& law, std::uint64_t seed, std::size_t n);

/// One value per line after a '#'-prefixed header carrying law and seed.
void write_csv(std::ostream& os, const SampleBatch& batch);

}  // namespace mdt
