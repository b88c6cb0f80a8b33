// mdtail: command-line driver for the bound, simulation and certification
// library. Every command reads one YAML config; see README.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "config.hpp"
#include "json.hpp"
#include "mdt/entropy.hpp"
#include "mdt/errors.hpp"
#include "mdt/gls.hpp"
#include "mdt/harness.hpp"
#include "mdt/moments.hpp"
#include "mdt/sum_bounds.hpp"

#ifndef MDTAIL_VERSION
#define MDTAIL_VERSION "0.0.0"
#endif

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

enum Exit { kOk = 0, kCertifyFail = 1, kConfigError = 2, kNumericError = 3 };

/// Certification or coverage verdict that should end the run with exit 1.
struct RunFailed {
  std::string message;
};

class Emitter {
 public:
  Emitter(const mdtail::RunConfig& cfg, std::string command)
      : cfg_(cfg), command_(std::move(command)), dir_(cfg.output.dir) {
    fs::create_directories(dir_);
  }

  std::string header() const {
    std::ostringstream os;
    os << "# tool: mdtail " << MDTAIL_VERSION << "\n"
       << "# command: " << command_ << "\n"
       << "# config_hash: " << cfg_.hash() << "\n"
       << "# seed: " << cfg_.plan.seed << "\n"
       << "# config: " << cfg_.echo().dump() << "\n";
    return os.str();
  }

  json meta() const {
    return {{"tool", std::string("mdtail ") + MDTAIL_VERSION},
            {"command", command_},
            {"config_hash", cfg_.hash()},
            {"seed", cfg_.plan.seed},
            {"config", cfg_.echo()}};
  }

  template <class Writer>
  void csv(const std::string& name, Writer&& write) const {
    if (!cfg_.output.csv) return;
    std::ostringstream body;
    write(body);
    put(name + ".csv", header() + body.str());
  }

  void summary(const json& body) const {
    if (!cfg_.output.json) return;
    json j = meta();
    for (const auto& [k, v] : body.items()) j[k] = v;
    put(command_ + ".json", j.dump(2) + "\n");
  }

 private:
  void put(const std::string& name, const std::string& text) const {
    const fs::path path = dir_ / name;
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + path.string());
    std::cout << path.string() << "\n";
  }

  const mdtail::RunConfig& cfg_;
  std::string command_;
  fs::path dir_;
};

json constants_json(const mdt::SumBoundModel& m) {
  return {{"mode", mdt::constant_mode_name(m.mode)}, {"C1_sum", m.c1_sum}, {"closed", m.closed_constant}};
}

json verdict_json(const mdt::CurveVerdict& v) {
  return {{"name", v.name}, {"lower", v.lower}, {"passed", v.passed}, {"violating_u", v.violating_u}};
}

json report_json(const mdt::EmpiricalTailReport& r) {
  json j = {{"statistic", r.statistic}, {"n_grid", r.n_grid}, {"reps", r.reps}, {"seed", r.seed},
            {"delta", r.delta},         {"dkw", r.dkw},       {"u_points", r.u_grid.size()}};
  j["n_grid_note"] =
      "sup over n is truncated to the listed n; per-n tails are in the CSV so saturation can be judged";
  return j;
}

struct Models {
  mdt::SumMomentEnvelope envelope;
  mdt::SumBoundModel scalar;
  json calibration = nullptr;
};

/// Builds bound constants: pessimistic from the envelope, or calibrated on
/// a simulation run with the calibration seed; explicit overrides win.
Models build_models(const mdtail::RunConfig& cfg, const mdt::MdtParams& law) {
  auto envelope = mdt::SumMomentEnvelope::build(law, mdt::RosenthalModel{cfg.bounds.rosenthal_c0},
                                                cfg.bounds.envelope_points);
  Models m{envelope, mdt::SumBoundModel::pessimistic(envelope)};
  if (cfg.bounds.mode == mdt::ConstantMode::Calibrated) {
    mdt::SimulationPlan plan = cfg.make_plan(law);
    plan.seed = cfg.bounds.effective_calibration_seed(cfg.plan.seed);
    const mdt::EmpiricalTailReport run = mdt::simulate(plan);
    const double slack = cfg.bounds.calibration_slack ? *cfg.bounds.calibration_slack : run.dkw;
    const auto closed = mdt::calibrate_closed(m.scalar, run.u_grid, run.qhat, slack);
    const auto fenchel = mdt::calibrate_fenchel(m.scalar, run.u_grid, run.qhat, slack);
    m.scalar = mdt::SumBoundModel::with_constants(law, fenchel.c1_sum * cfg.bounds.constant_scale,
                                                  closed.closed_constant * cfg.bounds.constant_scale,
                                                  mdt::ConstantMode::Calibrated);
    m.calibration = {{"seed", plan.seed}, {"slack", slack}, {"constant_scale", cfg.bounds.constant_scale}};
  }
  if (cfg.bounds.c1_sum || cfg.bounds.closed_constant) {
    m.scalar = mdt::SumBoundModel::with_constants(law, cfg.bounds.c1_sum.value_or(m.scalar.c1_sum),
                                                  cfg.bounds.closed_constant.value_or(m.scalar.closed_constant),
                                                  m.scalar.mode);
  }
  return m;
}

mdt::MetricEntropyModel entropy_model(const mdtail::RunConfig& cfg) {
  return mdt::MetricEntropyModel::holder({cfg.entropy.d, cfg.entropy.alpha, cfg.entropy.c9, cfg.entropy.c10},
                                         cfg.entropy.c5);
}

json law_json(const mdt::MdtParams& law) {
  const mdt::ThetaRegime regime = mdt::ThetaRegime::of(law);
  return {{"beta", law.beta()},
          {"gamma", law.gamma()},
          {"v", law.v().to_string()},
          {"u_star", law.u_star()},
          {"regime", mdt::regime_name(regime.tag)}};
}

int cmd_bound(const mdtail::RunConfig& cfg) {
  const mdt::MdtParams law = cfg.make_law();
  const Models m = build_models(cfg, law);
  const std::vector<double> u = cfg.make_u_grid(law);
  const mdt::TailCurve closed = mdt::closed_curve(m.scalar);
  const mdt::TailCurve fenchel = mdt::fenchel_curve(m.scalar);
  const mdt::TailCurve witness = mdt::lower_witness_curve(law);

  Emitter out(cfg, "bound");
  out.csv("bound_closed", [&](std::ostream& os) { mdt::write_csv(os, closed, u); });
  out.csv("bound_fenchel", [&](std::ostream& os) { mdt::write_csv(os, fenchel, u); });
  out.csv("bound_witness", [&](std::ostream& os) { mdt::write_csv(os, witness, u); });
  out.summary({{"law", law_json(law)},
               {"closed_form", mdt::curve_kind_name(closed.kind())},
               {"closed_domain_start", mdt::closed_domain_start(law)},
               {"constants", constants_json(m.scalar)},
               {"calibration", m.calibration}});
  return kOk;
}

mdt::EmpiricalTailReport run_simulation(const mdtail::RunConfig& cfg, const mdt::MdtParams& law,
                                        const mdt::SimulationPlan& plan) {
  if (!cfg.plan.field) return mdt::simulate(plan);
  const auto field = mdt::FieldModel::create(law, cfg.entropy.weights, cfg.entropy.m);
  return mdt::simulate_field(field, plan);
}

int cmd_simulate(const mdtail::RunConfig& cfg) {
  const mdt::MdtParams law = cfg.make_law();
  const mdt::EmpiricalTailReport report = run_simulation(cfg, law, cfg.make_plan(law));
  Emitter out(cfg, "simulate");
  out.csv("simulate", [&](std::ostream& os) { mdt::write_csv(os, report); });
  out.summary({{"law", law_json(law)}, {"report", report_json(report)}, {"qhat", report.qhat}});
  return kOk;
}

int cmd_certify(const mdtail::RunConfig& cfg) {
  const mdt::MdtParams law = cfg.make_law();
  const mdt::SimulationPlan plan = cfg.make_plan(law);
  if (cfg.bounds.mode == mdt::ConstantMode::Calibrated &&
      cfg.bounds.effective_calibration_seed(cfg.plan.seed) == plan.seed) {
    throw mdtail::ConfigError("bounds.calibration.seed must differ from plan.seed: certification needs a fresh run");
  }
  const Models m = build_models(cfg, law);
  json extra = json::object();
  std::vector<mdt::NamedCurve> curves;

  if (!cfg.plan.field) {
    curves.push_back({"closed", mdt::closed_curve(m.scalar)});
    if (cfg.certify.fenchel) curves.push_back({"fenchel", mdt::fenchel_curve(m.scalar)});
    curves.push_back({"witness", mdt::lower_witness_curve(law)});
  } else {
    const auto field = mdt::FieldModel::create(law, cfg.entropy.weights, cfg.entropy.m);
    curves.push_back({"net_union", mdt::net_union_curve(field, m.envelope)});
    const bool finite = mdt::check_entropy_condition(cfg.entropy.d, cfg.entropy.alpha, law.beta(), law.gamma());
    if (finite) {
      std::optional<double> c6 = cfg.entropy.c6;
      if (!c6 && cfg.bounds.mode == mdt::ConstantMode::Calibrated) {
        mdt::SimulationPlan cal = plan;
        cal.seed = cfg.bounds.effective_calibration_seed(cfg.plan.seed);
        const auto run = mdt::simulate_field(field, cal);
        const double slack = cfg.bounds.calibration_slack ? *cfg.bounds.calibration_slack : run.dkw;
        c6 = mdt::calibrate_closed(m.scalar, run.u_grid, run.qhat, slack).closed_constant *
             cfg.bounds.constant_scale;
      }
      const mdt::TailCurve uniform = mdt::uniform_field_curve(entropy_model(cfg), m.scalar, c6);
      extra["C6"] = uniform.constants().at("C6");
      curves.push_back({"uniform_field", uniform});
    } else {
      extra["uniform_field"] = "skipped: entropy condition fails, entropic integral diverges";
    }
  }

  mdt::EmpiricalTailReport report = run_simulation(cfg, law, plan);
  const mdt::Certification cert =
      mdt::certify(report, curves, mdt::CertifyOptions{cfg.certify.upper_dkw_slack, cfg.certify.lower_dkw_slack});
  report.verdicts = cert.curves;

  json verdicts = json::array();
  for (const auto& v : cert.curves) verdicts.push_back(verdict_json(v));
  Emitter out(cfg, "certify");
  out.csv("certify", [&](std::ostream& os) { mdt::write_csv(os, report); });
  out.summary({{"law", law_json(law)},
               {"report", report_json(report)},
               {"constants", constants_json(m.scalar)},
               {"calibration", m.calibration},
               {"field", extra},
               {"verdicts", verdicts},
               {"passed", cert.passed}});

  for (const auto& v : cert.curves) {
    std::cerr << "certify: " << v.name << " " << (v.passed ? "PASS" : "FAIL");
    if (!v.passed) std::cerr << " at " << v.violating_u.size() << " grid points";
    std::cerr << "\n";
  }
  if (!cert.passed) throw RunFailed{"certification failed"};
  return kOk;
}

int cmd_confidence(const mdtail::RunConfig& cfg) {
  const mdt::MdtParams law = cfg.make_law();
  const Models m = build_models(cfg, law);
  const mdt::ConfidenceRadius r = mdt::confidence_radius(m.scalar, cfg.confidence.n, cfg.confidence.delta);

  json body = {{"law", law_json(law)},
               {"constants", constants_json(m.scalar)},
               {"calibration", m.calibration},
               {"n", r.n},
               {"delta", r.delta},
               {"radius", r.radius},
               {"certificate", r.certificate},
               {"attainable", r.attainable},
               {"search_max", r.search_max}};
  bool covered = true;
  if (r.attainable && cfg.confidence.trials > 0) {
    // a_n - a = S_n / sqrt(n) with a = 0, so |a_n| > r iff |S_n| > sqrt(n) r.
    mdt::SimulationPlan plan = cfg.make_plan(law);
    plan.n_grid = {cfg.confidence.n};
    plan.u_grid = {std::sqrt(static_cast<double>(cfg.confidence.n)) * r.radius};
    plan.reps = cfg.confidence.trials;
    const mdt::EmpiricalTailReport run = mdt::simulate(plan);
    const double miss = run.tails[0][0];
    const double allowed = r.delta + 3.0 * std::sqrt(r.delta / static_cast<double>(plan.reps));
    covered = miss <= allowed;
    body["coverage"] = {{"trials", plan.reps}, {"seed", plan.seed}, {"misses", run.counts[0][0]},
                        {"miss_rate", miss},   {"allowed", allowed}, {"passed", covered}};
  }
  Emitter out(cfg, "confidence");
  out.summary(body);
  if (!r.attainable) throw RunFailed{"radius unattainable: bound stays above delta up to sqrt(n) u = " +
                                     std::to_string(r.search_max)};
  if (!covered) throw RunFailed{"empirical miss rate exceeds delta + 3 sqrt(delta / trials)"};
  return kOk;
}

int cmd_entropy(const mdtail::RunConfig& cfg) {
  const mdt::MdtParams law = cfg.make_law();
  const bool condition = mdt::check_entropy_condition(cfg.entropy.d, cfg.entropy.alpha, law.beta(), law.gamma());
  const mdt::EntropyIntegral integral = mdt::entropy_integral(entropy_model(cfg), law.beta(), law.gamma());
  json body = {{"law", law_json(law)},
               {"d", cfg.entropy.d},
               {"alpha", cfg.entropy.alpha},
               {"condition", condition},
               {"finite", integral.finite()},
               {"integral", integral.finite() ? json(integral.value) : json("inf")},
               {"integral_error", integral.error}};
  if (integral.finite()) {
    const auto envelope = mdt::SumMomentEnvelope::build(law, mdt::RosenthalModel{cfg.bounds.rosenthal_c0},
                                                        cfg.bounds.envelope_points);
    body["C6_pessimistic"] = mdt::pessimistic_c6(entropy_model(cfg), mdt::SumBoundModel::pessimistic(envelope));
  }
  Emitter out(cfg, "entropy");
  out.summary(body);
  std::cerr << "entropy: condition " << (condition ? "true" : "false") << ", I = "
            << (integral.finite() ? std::to_string(integral.value) : std::string("inf")) << "\n";
  return kOk;
}

int cmd_moments(const mdtail::RunConfig& cfg) {
  const mdt::MdtParams law = cfg.make_law();
  const double lo = cfg.moments.p_min.value_or(std::max(2.0, law.beta() - 0.5));
  const double hi = cfg.moments.p_max.value_or(law.beta() - mdt::kDeltaP);
  const auto grid = mdt::linear_grid(lo, hi, cfg.moments.points);
  const mdt::EquivalenceReport rep = mdt::verify_equivalence(law, grid, cfg.moments.threshold);
  Emitter out(cfg, "moments");
  out.csv("moments", [&](std::ostream& os) { mdt::write_csv(os, rep); });
  json body = {{"law", law_json(law)},
               {"min_ratio", rep.min_ratio},
               {"max_ratio", rep.max_ratio},
               {"band", rep.max_ratio / rep.min_ratio},
               {"threshold", rep.threshold},
               {"passed", rep.pass},
               {"limiting_ratio", rep.limiting_ratio}};
  if (rep.gamma_constant) body["gamma_constant"] = *rep.gamma_constant;
  out.summary(body);
  return kOk;
}

int cmd_fenchel(const mdtail::RunConfig& cfg) {
  const mdt::MdtParams law = cfg.make_law();
  const auto psi = mdt::GeneratingFunction::analytic_theta(mdt::ThetaRegime::of(law));
  const auto y = mdt::linear_grid(cfg.fenchel.y_min, cfg.fenchel.y_max, cfg.fenchel.points);
  const mdt::FenchelCurve curve = mdt::fenchel_curve(psi, y);
  Emitter out(cfg, "fenchel");
  out.csv("fenchel", [&](std::ostream& os) { mdt::write_csv(os, curve); });
  out.summary({{"law", law_json(law)}, {"psi", mdt::provenance_name(psi.provenance())}});
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mdtail: uniform tail bounds for normalized sums with moderate tails"};
  app.set_version_flag("--version", std::string("mdtail ") + MDTAIL_VERSION);
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed, budget;
  std::optional<std::string> out_dir;
  std::optional<unsigned> threads;
  app.add_option("--config", config_path, "YAML run configuration")->required();
  app.add_option("--seed", seed, "master seed (overrides plan.seed)");
  app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  app.add_option("--threads", threads, "worker threads (overrides plan.threads)")->check(CLI::PositiveNumber);
  app.add_option("--budget", budget, "total draw cap (overrides plan.budget)");

  using Handler = int (*)(const mdtail::RunConfig&);
  const std::vector<std::pair<std::string, std::pair<std::string, Handler>>> commands = {
      {"bound", {"closed-form, Fenchel and lower-witness curves", cmd_bound}},
      {"simulate", {"Monte Carlo estimate of sup_n P(|S_n| > u)", cmd_simulate}},
      {"certify", {"simulate and check every bound against the DKW envelope", cmd_certify}},
      {"confidence", {"confidence radius for the sample mean, optional coverage run", cmd_confidence}},
      {"entropy", {"entropy condition and entropic integral", cmd_entropy}},
      {"moments", {"moment / theta equivalence grid", cmd_moments}},
      {"fenchel", {"Young-Fenchel transform of the theta generating function", cmd_fenchel}},
  };
  for (const auto& [name, entry] : commands) app.add_subcommand(name, entry.first);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    mdtail::RunConfig cfg = mdtail::load_config_file(config_path);
    if (seed) cfg.plan.seed = *seed;
    if (out_dir) cfg.output.dir = *out_dir;
    if (threads) cfg.plan.threads = *threads;
    if (budget) cfg.plan.budget = *budget;
    for (const auto& [name, entry] : commands) {
      if (name == command) return entry.second(cfg);
    }
    return kConfigError;
  } catch (const RunFailed& e) {
    std::cerr << "mdtail " << command << ": FAIL: " << e.message << "\n";
    return kCertifyFail;
  } catch (const mdtail::ConfigError& e) {
    std::cerr << "mdtail " << command << ": config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const mdt::ParseError& e) {
    std::cerr << "mdtail " << command << ": parse error: " << e.what() << "\n";
    return kConfigError;
  } catch (const mdt::PlanRejected& e) {
    std::cerr << "mdtail " << command << ": plan rejected: " << e.what() << "\n";
    return kConfigError;
  } catch (const mdt::DomainError& e) {
    std::cerr << "mdtail " << command << ": domain error: " << e.what() << "\n";
    return kConfigError;
  } catch (const mdt::PreconditionError& e) {
    std::cerr << "mdtail " << command << ": precondition failed: " << e.what() << "\n";
    return kConfigError;
  } catch (const mdt::NumericError& e) {
    std::cerr << "mdtail " << command << ": numeric error: " << e.what() << "\n";
    return kNumericError;
  } catch (const std::exception& e) {
    std::cerr << "mdtail " << command << ": error: " << e.what() << "\n";
    return kNumericError;
  }
}
