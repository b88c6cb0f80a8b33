#include "config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "mdt/errors.hpp"

namespace mdtail {
namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& at, const std::string& what) const {
    std::ostringstream msg;
    msg << source_;
    const YAML::Mark m = at.Mark();
    if (m.line >= 0) msg << ":" << m.line + 1 << ":" << m.column + 1;
    msg << ": " << what;
    throw ConfigError(msg.str());
  }

  void require_map(const YAML::Node& node, const std::string& path) const {
    if (!node.IsMap()) fail(node, "'" + path + "' must be a mapping");
  }

  void check_keys(const YAML::Node& node, const std::string& path, const std::set<std::string>& allowed) const {
    require_map(node, path);
    for (const auto& kv : node) {
      const std::string key = kv.first.as<std::string>();
      if (!allowed.count(key)) {
        std::string list;
        for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
        fail(kv.first, "unknown key '" + key + "' in '" + path + "' (allowed: " + list + ")");
      }
    }
  }

  double number(const YAML::Node& node, const std::string& path) const {
    if (!node.IsScalar()) fail(node, "'" + path + "' must be a number");
    try {
      const double x = node.as<double>();
      if (!std::isfinite(x)) fail(node, "'" + path + "' must be finite");
      return x;
    } catch (const YAML::BadConversion&) {
      fail(node, "'" + path + "' must be a number, got '" + node.Scalar() + "'");
    }
  }

  double positive(const YAML::Node& node, const std::string& path) const {
    const double x = number(node, path);
    if (!(x > 0.0)) fail(node, "'" + path + "' must be > 0");
    return x;
  }

  std::uint64_t count(const YAML::Node& node, const std::string& path) const {
    const double x = number(node, path);
    if (x < 0.0 || x != std::floor(x) || x > 1.8e19) fail(node, "'" + path + "' must be a nonnegative integer");
    return static_cast<std::uint64_t>(x);
  }

  bool boolean(const YAML::Node& node, const std::string& path) const {
    try {
      return node.as<bool>();
    } catch (const YAML::BadConversion&) {
      fail(node, "'" + path + "' must be true or false");
    }
  }

  std::string text(const YAML::Node& node, const std::string& path) const {
    if (!node.IsScalar()) fail(node, "'" + path + "' must be a string");
    return node.Scalar();
  }

  std::vector<double> numbers(const YAML::Node& node, const std::string& path) const {
    if (!node.IsSequence()) fail(node, "'" + path + "' must be a list of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < node.size(); ++i) out.push_back(number(node[i], path + "[" + std::to_string(i) + "]"));
    return out;
  }

 private:
  std::string source_;
};

void parse_u_grid(const Reader& r, const YAML::Node& node, const std::string& path, UGridSpec& out) {
  if (node.IsSequence()) {
    out.values = r.numbers(node, path);
    if (out.values.empty()) r.fail(node, "'" + path + "' must not be empty");
    for (std::size_t i = 0; i < out.values.size(); ++i) {
      if (!(out.values[i] > 0.0) || (i > 0 && out.values[i] <= out.values[i - 1])) {
        r.fail(node, "'" + path + "' must be positive and strictly increasing");
      }
    }
    return;
  }
  r.check_keys(node, path, {"points", "upper_q"});
  if (node["points"]) {
    out.points = r.count(node["points"], path + ".points");
    if (out.points < 2) r.fail(node["points"], "'" + path + ".points' must be >= 2");
  }
  if (node["upper_q"]) {
    out.upper_q = r.number(node["upper_q"], path + ".upper_q");
    if (!(out.upper_q > 0.0 && out.upper_q < 1.0)) r.fail(node["upper_q"], "'" + path + ".upper_q' must lie in (0, 1)");
  }
}

RunConfig parse(const YAML::Node& root, const Reader& r) {
  RunConfig c;
  if (!root || root.IsNull()) throw ConfigError("config is empty; 'law.beta' is required");
  r.check_keys(root, "<root>", {"law", "bounds", "plan", "certify", "confidence", "entropy", "moments", "fenchel", "output"});

  const YAML::Node law = root["law"];
  if (!law) r.fail(root, "missing required section 'law'");
  r.check_keys(law, "law", {"beta", "gamma", "v", "u_star"});
  if (!law["beta"]) r.fail(law, "missing required key 'law.beta'");
  c.law.beta = r.number(law["beta"], "law.beta");
  if (!(c.law.beta > 2.0)) r.fail(law["beta"], "'law.beta' must be > 2");
  if (law["gamma"]) c.law.gamma = r.number(law["gamma"], "law.gamma");
  if (law["v"]) {
    c.law.v = r.text(law["v"], "law.v");
    try {
      mdt::SlowlyVarying::parse(c.law.v);
    } catch (const mdt::ParseError& e) {
      r.fail(law["v"], e.what());
    }
  }
  if (law["u_star"]) c.law.u_star = r.number(law["u_star"], "law.u_star");

  if (const YAML::Node b = root["bounds"]) {
    r.check_keys(b, "bounds", {"mode", "rosenthal_c0", "envelope_points", "constants", "calibration"});
    if (b["mode"]) {
      const std::string mode = r.text(b["mode"], "bounds.mode");
      if (mode == "pessimistic") {
        c.bounds.mode = mdt::ConstantMode::PessimisticAnalytic;
      } else if (mode == "calibrated") {
        c.bounds.mode = mdt::ConstantMode::Calibrated;
      } else {
        r.fail(b["mode"], "'bounds.mode' must be 'pessimistic' or 'calibrated', got '" + mode + "'");
      }
    }
    if (b["rosenthal_c0"]) c.bounds.rosenthal_c0 = r.positive(b["rosenthal_c0"], "bounds.rosenthal_c0");
    if (b["envelope_points"]) {
      c.bounds.envelope_points = r.count(b["envelope_points"], "bounds.envelope_points");
      if (c.bounds.envelope_points < 2) r.fail(b["envelope_points"], "'bounds.envelope_points' must be >= 2");
    }
    if (const YAML::Node k = b["constants"]) {
      r.check_keys(k, "bounds.constants", {"C1_sum", "closed"});
      if (k["C1_sum"]) c.bounds.c1_sum = r.positive(k["C1_sum"], "bounds.constants.C1_sum");
      if (k["closed"]) c.bounds.closed_constant = r.positive(k["closed"], "bounds.constants.closed");
    }
    if (const YAML::Node k = b["calibration"]) {
      r.check_keys(k, "bounds.calibration", {"seed", "slack", "constant_scale"});
      if (k["seed"]) c.bounds.calibration_seed = r.count(k["seed"], "bounds.calibration.seed");
      if (k["slack"]) {
        const std::string s = k["slack"].IsScalar() ? k["slack"].Scalar() : "";
        if (s != "dkw") {
          c.bounds.calibration_slack = r.number(k["slack"], "bounds.calibration.slack");
          if (*c.bounds.calibration_slack < 0.0) r.fail(k["slack"], "'bounds.calibration.slack' must be >= 0 or 'dkw'");
        }
      }
      if (k["constant_scale"]) c.bounds.constant_scale = r.positive(k["constant_scale"], "bounds.calibration.constant_scale");
    }
  }

  c.plan.n_grid = mdt::SimulationPlan::default_n_grid();
  if (const YAML::Node p = root["plan"]) {
    r.check_keys(p, "plan", {"n_grid", "reps", "u_grid", "seed", "delta", "field", "threads", "budget"});
    if (p["n_grid"]) {
      const std::vector<double> g = r.numbers(p["n_grid"], "plan.n_grid");
      c.plan.n_grid.clear();
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (g[i] < 1 || g[i] != std::floor(g[i])) r.fail(p["n_grid"], "'plan.n_grid' entries must be integers >= 1");
        if (i > 0 && g[i] <= g[i - 1]) r.fail(p["n_grid"], "'plan.n_grid' must be strictly increasing");
        c.plan.n_grid.push_back(static_cast<std::size_t>(g[i]));
      }
      if (c.plan.n_grid.empty()) r.fail(p["n_grid"], "'plan.n_grid' must not be empty");
    }
    if (p["reps"]) {
      c.plan.reps = r.count(p["reps"], "plan.reps");
      if (c.plan.reps < 1000) r.fail(p["reps"], "'plan.reps' must be >= 1000");
    }
    if (p["u_grid"]) parse_u_grid(r, p["u_grid"], "plan.u_grid", c.plan.u_grid);
    if (p["seed"]) c.plan.seed = r.count(p["seed"], "plan.seed");
    if (p["delta"]) {
      c.plan.delta = r.number(p["delta"], "plan.delta");
      if (!(c.plan.delta > 0.0 && c.plan.delta < 1.0)) r.fail(p["delta"], "'plan.delta' must lie in (0, 1)");
    }
    if (p["field"]) c.plan.field = r.boolean(p["field"], "plan.field");
    if (p["threads"]) {
      c.plan.threads = static_cast<unsigned>(r.count(p["threads"], "plan.threads"));
      if (c.plan.threads < 1) r.fail(p["threads"], "'plan.threads' must be >= 1");
    }
    if (p["budget"]) c.plan.budget = r.count(p["budget"], "plan.budget");
  }

  if (const YAML::Node k = root["certify"]) {
    r.check_keys(k, "certify", {"upper_dkw_slack", "lower_dkw_slack", "fenchel"});
    if (k["upper_dkw_slack"]) c.certify.upper_dkw_slack = r.boolean(k["upper_dkw_slack"], "certify.upper_dkw_slack");
    if (k["lower_dkw_slack"]) c.certify.lower_dkw_slack = r.boolean(k["lower_dkw_slack"], "certify.lower_dkw_slack");
    if (k["fenchel"]) c.certify.fenchel = r.boolean(k["fenchel"], "certify.fenchel");
  }

  if (const YAML::Node k = root["confidence"]) {
    r.check_keys(k, "confidence", {"n", "delta", "trials"});
    if (k["n"]) {
      c.confidence.n = r.count(k["n"], "confidence.n");
      if (c.confidence.n < 1) r.fail(k["n"], "'confidence.n' must be >= 1");
    }
    if (k["delta"]) {
      c.confidence.delta = r.number(k["delta"], "confidence.delta");
      if (!(c.confidence.delta > 0.0 && c.confidence.delta <= 1.0)) r.fail(k["delta"], "'confidence.delta' must lie in (0, 1]");
    }
    if (k["trials"]) {
      c.confidence.trials = r.count(k["trials"], "confidence.trials");
      if (c.confidence.trials != 0 && c.confidence.trials < 1000) r.fail(k["trials"], "'confidence.trials' must be 0 or >= 1000");
    }
  }

  if (const YAML::Node k = root["entropy"]) {
    r.check_keys(k, "entropy", {"d", "alpha", "C5", "C9", "C10", "J", "weights", "M", "C6"});
    if (k["d"]) c.entropy.d = r.number(k["d"], "entropy.d");
    if (k["alpha"]) c.entropy.alpha = r.number(k["alpha"], "entropy.alpha");
    if (k["C5"]) c.entropy.c5 = r.positive(k["C5"], "entropy.C5");
    if (k["C9"]) c.entropy.c9 = r.positive(k["C9"], "entropy.C9");
    if (k["C10"]) c.entropy.c10 = r.positive(k["C10"], "entropy.C10");
    if (k["weights"]) {
      c.entropy.weights = r.numbers(k["weights"], "entropy.weights");
      if (c.entropy.weights.empty()) r.fail(k["weights"], "'entropy.weights' must not be empty");
    }
    if (k["J"]) {
      const std::uint64_t j = r.count(k["J"], "entropy.J");
      if (j < 1) r.fail(k["J"], "'entropy.J' must be >= 1");
      if (!k["weights"]) {
        c.entropy.weights.assign(j, 1.0);
      } else if (j != c.entropy.weights.size()) {
        r.fail(k["J"], "'entropy.J' must equal the length of 'entropy.weights'");
      }
    }
    if (k["M"]) {
      c.entropy.m = r.count(k["M"], "entropy.M");
      if (c.entropy.m < 1) r.fail(k["M"], "'entropy.M' must be >= 1");
    }
    if (k["C6"]) c.entropy.c6 = r.positive(k["C6"], "entropy.C6");
    if (!(c.entropy.d >= 1.0)) r.fail(k, "'entropy.d' must be >= 1");
    if (!(c.entropy.alpha > 0.0 && c.entropy.alpha <= 1.0)) r.fail(k, "'entropy.alpha' must lie in (0, 1]");
  }

  if (const YAML::Node k = root["moments"]) {
    r.check_keys(k, "moments", {"p_min", "p_max", "points", "threshold"});
    if (k["p_min"]) c.moments.p_min = r.number(k["p_min"], "moments.p_min");
    if (k["p_max"]) c.moments.p_max = r.number(k["p_max"], "moments.p_max");
    if (k["points"]) {
      c.moments.points = r.count(k["points"], "moments.points");
      if (c.moments.points < 2) r.fail(k["points"], "'moments.points' must be >= 2");
    }
    if (k["threshold"]) c.moments.threshold = r.positive(k["threshold"], "moments.threshold");
  }

  if (const YAML::Node k = root["fenchel"]) {
    r.check_keys(k, "fenchel", {"y_min", "y_max", "points"});
    if (k["y_min"]) c.fenchel.y_min = r.number(k["y_min"], "fenchel.y_min");
    if (k["y_max"]) c.fenchel.y_max = r.number(k["y_max"], "fenchel.y_max");
    if (k["points"]) {
      c.fenchel.points = r.count(k["points"], "fenchel.points");
      if (c.fenchel.points < 2) r.fail(k["points"], "'fenchel.points' must be >= 2");
    }
    if (!(c.fenchel.y_max > c.fenchel.y_min)) r.fail(k, "'fenchel.y_max' must exceed 'fenchel.y_min'");
  }

  if (const YAML::Node k = root["output"]) {
    r.check_keys(k, "output", {"dir", "formats"});
    if (k["dir"]) c.output.dir = r.text(k["dir"], "output.dir");
    if (const YAML::Node f = k["formats"]) {
      if (!f.IsSequence()) r.fail(f, "'output.formats' must be a list");
      c.output.csv = c.output.json = false;
      for (const auto& item : f) {
        const std::string s = r.text(item, "output.formats");
        if (s == "csv") {
          c.output.csv = true;
        } else if (s == "json") {
          c.output.json = true;
        } else {
          r.fail(item, "unknown output format '" + s + "' (allowed: csv, json)");
        }
      }
    }
  }
  return c;
}

nlohmann::ordered_json u_grid_json(const UGridSpec& g) {
  if (!g.values.empty()) return g.values;
  return {{"points", g.points}, {"upper_q", g.upper_q}};
}

nlohmann::ordered_json optional_json(const std::optional<double>& x) {
  return x ? nlohmann::ordered_json(*x) : nlohmann::ordered_json(nullptr);
}

}  // namespace

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

mdt::MdtParams RunConfig::make_law() const {
  return mdt::MdtParams::create(law.beta, law.gamma, mdt::SlowlyVarying::parse(law.v), law.u_star);
}

std::vector<double> RunConfig::make_u_grid(const mdt::MdtParams& l) const {
  if (!plan.u_grid.values.empty()) return plan.u_grid.values;
  return mdt::SimulationPlan::default_u_grid(l, plan.u_grid.points, plan.u_grid.upper_q);
}

mdt::SimulationPlan RunConfig::make_plan(const mdt::MdtParams& l) const {
  mdt::SimulationPlan p(l);
  p.n_grid = plan.n_grid;
  p.reps = plan.reps;
  p.u_grid = make_u_grid(l);
  p.seed = plan.seed;
  p.delta = plan.delta;
  p.threads = plan.threads;
  p.budget = plan.budget;
  return p;
}

nlohmann::ordered_json RunConfig::echo() const {
  using J = nlohmann::ordered_json;
  J j;
  j["law"] = {{"beta", law.beta}, {"gamma", law.gamma}, {"v", law.v}, {"u_star", optional_json(law.u_star)}};
  J calibration = {{"seed", bounds.calibration_seed ? J(*bounds.calibration_seed) : J(plan.seed + 1)},
                   {"slack", bounds.calibration_slack ? J(*bounds.calibration_slack) : J("dkw")},
                   {"constant_scale", bounds.constant_scale}};
  j["bounds"] = {{"mode", bounds.mode == mdt::ConstantMode::Calibrated ? "calibrated" : "pessimistic"},
                 {"rosenthal_c0", bounds.rosenthal_c0},
                 {"envelope_points", bounds.envelope_points},
                 {"constants", {{"C1_sum", optional_json(bounds.c1_sum)}, {"closed", optional_json(bounds.closed_constant)}}},
                 {"calibration", calibration}};
  j["plan"] = {{"n_grid", plan.n_grid}, {"reps", plan.reps},       {"u_grid", u_grid_json(plan.u_grid)},
               {"seed", plan.seed},     {"delta", plan.delta},     {"field", plan.field},
               {"budget", plan.budget}};
  j["certify"] = {{"upper_dkw_slack", certify.upper_dkw_slack},
                  {"lower_dkw_slack", certify.lower_dkw_slack},
                  {"fenchel", certify.fenchel}};
  j["confidence"] = {{"n", confidence.n}, {"delta", confidence.delta}, {"trials", confidence.trials}};
  j["entropy"] = {{"d", entropy.d},         {"alpha", entropy.alpha}, {"C5", entropy.c5},
                  {"C9", entropy.c9},       {"C10", entropy.c10},     {"J", entropy.weights.size()},
                  {"weights", entropy.weights}, {"M", entropy.m},     {"C6", optional_json(entropy.c6)}};
  j["moments"] = {{"p_min", optional_json(moments.p_min)},
                  {"p_max", optional_json(moments.p_max)},
                  {"points", moments.points},
                  {"threshold", moments.threshold}};
  j["fenchel"] = {{"y_min", fenchel.y_min}, {"y_max", fenchel.y_max}, {"points", fenchel.points}};
  J formats = J::array();
  if (output.csv) formats.push_back("csv");
  if (output.json) formats.push_back("json");
  j["output"] = {{"formats", formats}};
  return j;
}

std::string RunConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(echo().dump())));
  return buf;
}

RunConfig load_config_text(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    std::ostringstream msg;
    msg << source << ":" << e.mark.line + 1 << ":" << e.mark.column + 1 << ": YAML syntax error: " << e.msg;
    throw ConfigError(msg.str());
  }
  return parse(root, Reader(source));
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_config_text(buf.str(), path);
}

}  // namespace mdtail
