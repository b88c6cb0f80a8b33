#pragma once

// Run configuration for mdtail: a YAML key tree validated against a fixed
// schema before any computation. See README for the key reference.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "mdt/distribution.hpp"
#include "mdt/harness.hpp"
#include "mdt/sum_bounds.hpp"

namespace mdtail {

/// Schema or value error; the message carries line and column.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct UGridSpec {
  std::vector<double> values;  // explicit grid, or empty
  std::size_t points = 64;
  double upper_q = 1e-4;
};

struct LawConfig {
  double beta = 0.0;
  double gamma = 0.0;
  std::string v = "c(1)";
  std::optional<double> u_star;
};

struct BoundsConfig {
  mdt::ConstantMode mode = mdt::ConstantMode::PessimisticAnalytic;
  double rosenthal_c0 = 2.0;
  std::size_t envelope_points = 240;
  std::optional<double> c1_sum;
  std::optional<double> closed_constant;
  std::optional<std::uint64_t> calibration_seed;  // default: plan seed + 1
  std::optional<double> calibration_slack;         // default: DKW half-width
  double constant_scale = 1.0;

  std::uint64_t effective_calibration_seed(std::uint64_t plan_seed) const {
    return calibration_seed ? *calibration_seed : plan_seed + 1;
  }
};

struct PlanConfig {
  std::vector<std::size_t> n_grid;
  std::size_t reps = 100'000;
  UGridSpec u_grid;
  std::uint64_t seed = 1;
  double delta = 1e-3;
  bool field = false;
  unsigned threads = 1;
  std::uint64_t budget = 1'000'000'000ULL;
};

struct CertifyConfig {
  bool upper_dkw_slack = true;
  bool lower_dkw_slack = true;
  bool fenchel = true;
};

struct ConfidenceConfig {
  std::size_t n = 10'000;
  double delta = 1e-3;
  std::size_t trials = 0;  // coverage experiment when > 0
};

// Hoelder entropy model plus the reference field eta(z) = sum_j a_j xi_j cos(2 pi j z + U_j).
struct EntropyConfig {
  double d = 1.0;
  double alpha = 1.0;
  double c5 = 1.0;
  double c9 = 1.0;
  double c10 = 1.0;
  std::vector<double> weights{1.0};  // a_1..a_J
  std::size_t m = 64;                // z-grid size
  std::optional<double> c6;
};

struct MomentsConfig {
  std::optional<double> p_min;  // default beta - 0.5
  std::optional<double> p_max;  // default beta - 1e-3
  std::size_t points = 60;
  double threshold = 50.0;
};

struct FenchelConfig {
  double y_min = 0.0;
  double y_max = 30.0;
  std::size_t points = 121;
};

struct OutputConfig {
  std::string dir = "out";
  bool csv = true;
  bool json = true;
};

struct RunConfig {
  LawConfig law;
  BoundsConfig bounds;
  PlanConfig plan;
  CertifyConfig certify;
  ConfidenceConfig confidence;
  EntropyConfig entropy;
  MomentsConfig moments;
  FenchelConfig fenchel;
  OutputConfig output;

  mdt::MdtParams make_law() const;
  std::vector<double> make_u_grid(const mdt::MdtParams& law) const;
  mdt::SimulationPlan make_plan(const mdt::MdtParams& law) const;
  /// Effective configuration without run-local keys (threads, output dir).
  nlohmann::ordered_json echo() const;
  /// FNV-1a 64 of echo().dump(), as 16 hex digits.
  std::string hash() const;
};

RunConfig load_config_file(const std::string& path);
RunConfig load_config_text(const std::string& text, const std::string& source = "<config>");

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace mdtail
