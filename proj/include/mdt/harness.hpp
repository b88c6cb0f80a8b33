#pragma once

// Monte Carlo estimation of Q(u) = sup_n P(|S_n| > u) over a finite n-grid,
// certification of tail curves against DKW envelopes, and confidence radii
// for sample means.
//
// Replication r of sum length n reads counters r*n .. r*n + n - 1 of the
// stream CounterStream(seed).child(n), so results do not depend on the
// number of worker threads or on which other n are in the grid.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "mdt/distribution.hpp"
#include "mdt/entropy.hpp"
#include "mdt/sum_bounds.hpp"

namespace mdt {

inline constexpr std::uint64_t kDefaultBudget = 1'000'000'000ULL;

struct SimulationPlan {
  explicit SimulationPlan(MdtParams l) : law(std::move(l)) {}

  MdtParams law;
  std::vector<std::size_t> n_grid = default_n_grid();
  std::size_t reps = 100'000;
  std::vector<double> u_grid;
  std::uint64_t seed = 1;
  double delta = 1e-3;
  unsigned threads = 1;
  std::uint64_t budget = kDefaultBudget;

  /// {1, 2, 4, ..., 1024}
  static std::vector<std::size_t> default_n_grid();
  /// `points` geometric values from u_star to quantile(upper_q).
  static std::vector<double> default_u_grid(const MdtParams& law, std::size_t points = 64,
                                            double upper_q = 1e-4);

  /// Throws DomainError on malformed plans and PlanRejected over budget.
  void validate(std::uint64_t draws_per_term = 1) const;
  std::uint64_t total_draws(std::uint64_t draws_per_term = 1) const;
};

/// sqrt(ln(2 / delta) / (2 reps)).
double dkw_half_width(std::size_t reps, double delta);

struct CurveVerdict {
  std::string name;
  bool lower = false;
  std::vector<double> values;
  std::vector<bool> pass;
  std::vector<double> violating_u;
  bool passed = true;
};

struct EmpiricalTailReport {
  std::string statistic;  // "abs" or "sup-norm"
  std::vector<double> u_grid;
  std::vector<std::size_t> n_grid;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
  double delta = 0.0;
  double dkw = 0.0;
  /// counts[k][i]: replications of n_grid[k] with statistic > u_grid[i].
  std::vector<std::vector<std::uint64_t>> counts;
  std::vector<std::vector<double>> tails;
  std::vector<double> qhat;
  std::vector<CurveVerdict> verdicts;

  bool passed() const;
};

EmpiricalTailReport simulate(const SimulationPlan& plan);

/// Same pipeline with per-replication statistic max_m |Y_n(z_m)| on the
/// field's z-grid.
EmpiricalTailReport simulate_field(const FieldModel& field, const SimulationPlan& plan);

struct CertifyOptions {
  /// Upper curves pass iff qhat - dkw <= curve (otherwise qhat <= curve).
  bool upper_dkw_slack = true;
  /// Lower curves pass iff qhat + dkw >= curve (otherwise qhat >= curve).
  bool lower_dkw_slack = true;
};

struct NamedCurve {
  std::string name;
  TailCurve curve;
};

struct Certification {
  std::vector<CurveVerdict> curves;
  bool passed = true;
};

/// Throws DomainError when u_grid differs from the report's grid.
Certification certify(const EmpiricalTailReport& report, const std::vector<NamedCurve>& curves,
                      const std::vector<double>& u_grid, const CertifyOptions& options = {});
Certification certify(const EmpiricalTailReport& report, const std::vector<NamedCurve>& curves,
                      const CertifyOptions& options = {});

struct ConfidenceTask {
  std::vector<double> evaluations;  // g(zeta_i)
  SumBoundModel tail_model;         // law of xi = g(zeta) - a
  double delta = 1e-3;
};

struct ConfidenceRadius {
  std::size_t n = 0;
  double delta = 0.0;
  double estimate = 0.0;     // a_n
  double radius = 0.0;       // u_delta
  double certificate = 1.0;  // bound on P(|a_n - a| > u_delta)
  bool attainable = true;
  double search_max = 0.0;   // largest sqrt(n) u tried
};

/// Smallest u with q_bound_closed(sqrt(n) u) <= delta, found by a doubling
/// scan then bisection on ln u.
ConfidenceRadius confidence_radius(const SumBoundModel& model, std::size_t n, double delta);
ConfidenceRadius confidence_radius(const ConfidenceTask& task);

/// Columns: u, tail_n<k>..., Qhat, dkw, then one PASS/FAIL column per verdict.
void write_csv(std::ostream& os, const EmpiricalTailReport& report);

}  // namespace mdt
