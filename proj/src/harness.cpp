#include "mdt/harness.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

#include "mdt/errors.hpp"
#include "mdt/kernels.hpp"

namespace mdt {
namespace {

constexpr std::size_t kBlock = 1024;

struct WorkItem {
  std::size_t n_index;
  std::size_t first_rep;
  std::size_t count;
};

std::vector<WorkItem> partition(const SimulationPlan& plan) {
  std::vector<WorkItem> items;
  for (std::size_t k = 0; k < plan.n_grid.size(); ++k) {
    for (std::size_t r = 0; r < plan.reps; r += kBlock) {
      items.push_back({k, r, std::min(kBlock, plan.reps - r)});
    }
  }
  return items;
}

// Runs `body(item, counts_out)` for every item with replication-index
// striping across workers, then reduces counts in item order.
EmpiricalTailReport run_items(const SimulationPlan& plan, const std::string& statistic,
                              const std::function<void(const WorkItem&, std::vector<double>&)>& body) {
  const std::vector<WorkItem> items = partition(plan);
  std::vector<std::vector<std::uint64_t>> item_counts(items.size());
  const unsigned workers = std::max(1U, std::min<unsigned>(plan.threads, static_cast<unsigned>(items.size())));

  auto work = [&](unsigned w) {
    std::vector<double> stat;
    for (std::size_t i = w; i < items.size(); i += workers) {
      stat.assign(items[i].count, 0.0);
      body(items[i], stat);
      std::vector<std::uint64_t>& c = item_counts[i];
      c.resize(plan.u_grid.size());
      for (std::size_t j = 0; j < plan.u_grid.size(); ++j) c[j] = kernels::count_greater(stat, plan.u_grid[j]);
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }

  EmpiricalTailReport rep;
  rep.statistic = statistic;
  rep.u_grid = plan.u_grid;
  rep.n_grid = plan.n_grid;
  rep.reps = plan.reps;
  rep.seed = plan.seed;
  rep.delta = plan.delta;
  rep.dkw = dkw_half_width(plan.reps, plan.delta);
  rep.counts.assign(plan.n_grid.size(), std::vector<std::uint64_t>(plan.u_grid.size(), 0));
  for (std::size_t i = 0; i < items.size(); ++i) {
    for (std::size_t j = 0; j < plan.u_grid.size(); ++j) rep.counts[items[i].n_index][j] += item_counts[i][j];
  }
  rep.tails.resize(plan.n_grid.size());
  rep.qhat.assign(plan.u_grid.size(), 0.0);
  for (std::size_t k = 0; k < plan.n_grid.size(); ++k) {
    rep.tails[k].resize(plan.u_grid.size());
    for (std::size_t j = 0; j < plan.u_grid.size(); ++j) {
      rep.tails[k][j] = static_cast<double>(rep.counts[k][j]) / static_cast<double>(plan.reps);
      rep.qhat[j] = std::max(rep.qhat[j], rep.tails[k][j]);
    }
  }
  return rep;
}

}  // namespace

std::vector<std::size_t> SimulationPlan::default_n_grid() {
  std::vector<std::size_t> g;
  for (std::size_t n = 1; n <= 1024; n *= 2) g.push_back(n);
  return g;
}

std::vector<double> SimulationPlan::default_u_grid(const MdtParams& law, std::size_t points, double upper_q) {
  if (points < 2) throw DomainError("u grid needs at least two points");
  const double lo = std::log(law.u_star());
  const double hi = std::log(quantile(law, upper_q));
  std::vector<double> g(points);
  for (std::size_t i = 0; i < points; ++i) {
    g[i] = std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1));
  }
  g.front() = law.u_star();
  return g;
}

std::uint64_t SimulationPlan::total_draws(std::uint64_t draws_per_term) const {
  std::uint64_t s = 0;
  for (std::size_t n : n_grid) s += static_cast<std::uint64_t>(n);
  return s * static_cast<std::uint64_t>(reps) * draws_per_term;
}

void SimulationPlan::validate(std::uint64_t draws_per_term) const {
  if (n_grid.empty()) throw DomainError("n grid is empty");
  if (n_grid.front() < 1) throw DomainError("sum lengths must be >= 1");
  for (std::size_t i = 1; i < n_grid.size(); ++i) {
    if (n_grid[i] <= n_grid[i - 1]) throw DomainError("n grid must be strictly increasing");
  }
  if (reps < 1000) throw DomainError("reps must be >= 1000");
  if (u_grid.empty()) throw DomainError("u grid is empty");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("DKW confidence delta must lie in (0, 1)");
  const std::uint64_t draws = total_draws(draws_per_term);
  if (draws > budget) {
    const std::uint64_t per_rep = draws / reps;
    std::ostringstream msg;
    msg << "plan needs " << draws << " draws, budget is " << budget << "; reduce reps to <= "
        << std::max<std::uint64_t>(budget / std::max<std::uint64_t>(per_rep, 1), 1)
        << " or raise the budget";
    throw PlanRejected(msg.str());
  }
}

double dkw_half_width(std::size_t reps, double delta) {
  return std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(reps)));
}

bool EmpiricalTailReport::passed() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const CurveVerdict& v) { return v.passed; });
}

EmpiricalTailReport simulate(const SimulationPlan& plan) {
  plan.validate();
  const CounterStream root(plan.seed);
  return run_items(plan, "abs", [&](const WorkItem& item, std::vector<double>& acc) {
    const std::size_t n = plan.n_grid[item.n_index];
    const CounterStream stream = root.child(n);
    std::vector<double> x(item.count);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t r = 0; r < item.count; ++r) {
        const std::uint64_t counter = (item.first_rep + r) * n + i;
        x[r] = draw_from_bits(plan.law, stream.bits(counter));
      }
      kernels::add_inplace(acc, x);
    }
    kernels::scale_abs(acc, 1.0 / std::sqrt(static_cast<double>(n)));
  });
}

EmpiricalTailReport simulate_field(const FieldModel& field, const SimulationPlan& plan) {
  const std::size_t terms = field.weights().size();
  plan.validate(2 * terms);
  const std::vector<double> z = field.z_grid();
  const std::size_t m_points = z.size();
  std::vector<std::vector<double>> cos_basis(terms, std::vector<double>(m_points));
  std::vector<std::vector<double>> sin_basis(terms, std::vector<double>(m_points));
  for (std::size_t j = 0; j < terms; ++j) {
    for (std::size_t m = 0; m < m_points; ++m) {
      const double arg = 2.0 * std::numbers::pi * static_cast<double>(j + 1) * z[m];
      cos_basis[j][m] = std::cos(arg);
      sin_basis[j][m] = -std::sin(arg);
    }
  }
  const CounterStream root = CounterStream(plan.seed).child(0xF1E1DULL);
  return run_items(plan, "sup-norm", [&](const WorkItem& item, std::vector<double>& out) {
    const std::size_t n = plan.n_grid[item.n_index];
    const CounterStream stream = root.child(n);
    std::vector<std::vector<double>> c(terms, std::vector<double>(item.count, 0.0));
    std::vector<std::vector<double>> s(terms, std::vector<double>(item.count, 0.0));
    std::vector<double> xc(item.count), xs(item.count);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < terms; ++j) {
        const double a = field.weights()[j];
        for (std::size_t r = 0; r < item.count; ++r) {
          const std::uint64_t counter = (((item.first_rep + r) * n + i) * terms + j) * 2;
          const double xi = draw_from_bits(field.marginal(), stream.bits(counter));
          const double phase = 2.0 * std::numbers::pi * CounterStream::unit_closed_open(stream.bits(counter + 1));
          const double ax = a * xi;
          xc[r] = ax * std::cos(phase);
          xs[r] = ax * std::sin(phase);
        }
        kernels::add_inplace(c[j], xc);
        kernels::add_inplace(s[j], xs);
      }
    }
    const double norm = 1.0 / std::sqrt(static_cast<double>(n));
    std::vector<double> y(m_points);
    for (std::size_t r = 0; r < item.count; ++r) {
      std::fill(y.begin(), y.end(), 0.0);
      for (std::size_t j = 0; j < terms; ++j) {
        kernels::axpy(y, c[j][r] * norm, cos_basis[j]);
        kernels::axpy(y, s[j][r] * norm, sin_basis[j]);
      }
      out[r] = kernels::max_abs(y);
    }
  });
}

Certification certify(const EmpiricalTailReport& report, const std::vector<NamedCurve>& curves,
                      const std::vector<double>& u_grid, const CertifyOptions& options) {
  if (u_grid != report.u_grid) throw DomainError("certification grid does not match the report grid");
  Certification cert;
  for (const NamedCurve& nc : curves) {
    CurveVerdict v;
    v.name = nc.name;
    v.lower = nc.curve.is_lower();
    for (std::size_t i = 0; i < u_grid.size(); ++i) {
      const double value = nc.curve(u_grid[i]);
      const double q = report.qhat[i];
      bool ok;
      if (v.lower) {
        ok = q + (options.lower_dkw_slack ? report.dkw : 0.0) >= value;
      } else {
        ok = q - (options.upper_dkw_slack ? report.dkw : 0.0) <= value;
      }
      v.values.push_back(value);
      v.pass.push_back(ok);
      if (!ok) v.violating_u.push_back(u_grid[i]);
    }
    v.passed = v.violating_u.empty();
    cert.passed = cert.passed && v.passed;
    cert.curves.push_back(std::move(v));
  }
  return cert;
}

Certification certify(const EmpiricalTailReport& report, const std::vector<NamedCurve>& curves,
                      const CertifyOptions& options) {
  return certify(report, curves, report.u_grid, options);
}

ConfidenceRadius confidence_radius(const SumBoundModel& model, std::size_t n, double delta) {
  if (n < 1) throw DomainError("confidence radius needs n >= 1");
  if (!(delta > 0.0 && delta <= 1.0)) throw DomainError("coverage level delta must lie in (0, 1]");
  const TailCurve bound = closed_curve(model);
  const double root_n = std::sqrt(static_cast<double>(n));

  ConfidenceRadius out;
  out.n = n;
  out.delta = delta;
  constexpr double kFirstPoint = 1e-12;
  if (bound(kFirstPoint) <= delta) {
    out.radius = kFirstPoint / root_n;
    out.certificate = bound(kFirstPoint);
    out.search_max = kFirstPoint;
    return out;
  }
  // Scan w = sqrt(n) u upward by doubling from e, then bisect on ln w.
  double lo = std::log(kFirstPoint);
  double hi = 1.0;
  constexpr double kMaxLogW = 700.0;
  while (bound(std::exp(hi)) > delta) {
    lo = hi;
    hi += std::numbers::ln2;
    if (hi > kMaxLogW) {
      out.attainable = false;
      out.radius = std::numeric_limits<double>::infinity();
      out.search_max = std::exp(kMaxLogW);
      out.certificate = bound(out.search_max);
      return out;
    }
  }
  out.search_max = std::exp(hi);
  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::fabs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (bound(std::exp(mid)) <= delta ? hi : lo) = mid;
  }
  const double w = std::exp(hi);
  out.radius = w / root_n;
  out.certificate = bound(w);
  return out;
}

ConfidenceRadius confidence_radius(const ConfidenceTask& task) {
  if (task.evaluations.empty()) throw DomainError("confidence task needs at least one evaluation");
  ConfidenceRadius r = confidence_radius(task.tail_model, task.evaluations.size(), task.delta);
  double sum = 0.0;
  for (double g : task.evaluations) sum += g;
  r.estimate = sum / static_cast<double>(task.evaluations.size());
  return r;
}

void write_csv(std::ostream& os, const EmpiricalTailReport& report) {
  os.precision(17);
  os << "u";
  for (std::size_t n : report.n_grid) os << ",tail_n" << n;
  os << ",Qhat,dkw";
  for (const CurveVerdict& v : report.verdicts) os << "," << v.name << "," << v.name << "_verdict";
  os << "\n";
  for (std::size_t i = 0; i < report.u_grid.size(); ++i) {
    os << report.u_grid[i];
    for (const auto& t : report.tails) os << "," << t[i];
    os << "," << report.qhat[i] << "," << report.dkw;
    for (const CurveVerdict& v : report.verdicts) os << "," << v.values[i] << "," << (v.pass[i] ? "PASS" : "FAIL");
    os << "\n";
  }
}

}  // namespace mdt
