// Command-line front end: simulate, audit, sweep, params.

#include "nsbo/csv.hpp"
#include "nsbo/experiment.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>

namespace {

std::vector<std::uint64_t> parse_seed_range(const std::string& spec) {
  const auto dots = spec.find("..");
  if (dots == std::string::npos) throw std::invalid_argument("--seeds expects N..M, got '" + spec + "'");
  const auto lo = std::stoull(spec.substr(0, dots));
  const auto hi = std::stoull(spec.substr(dots + 2));
  if (hi < lo) throw std::invalid_argument("--seeds: empty range '" + spec + "'");
  std::vector<std::uint64_t> out;
  for (auto s = lo; s <= hi; ++s) out.push_back(s);
  return out;
}

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::string seeds;
  std::string out;
  std::optional<double> kappa_scale;
  std::string stack;

  void apply(nsbo::ExperimentConfig& c) const {
    if (seed) c.seeds = {*seed};
    if (!seeds.empty()) c.seeds = parse_seed_range(seeds);
    if (!out.empty()) c.output = out;
    if (kappa_scale) c.algorithm.kappa_scale = *kappa_scale;
    if (!stack.empty()) c.algorithm.stack = nsbo::stack_from_string(stack);
  }
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--seed", o.seed, "Run a single seed");
  cmd->add_option("--seeds", o.seeds, "Seed range N..M (inclusive)");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--kappa-scale", o.kappa_scale, "Multiplier applied to the theoretical kappa0");
  cmd->add_option("--stack", o.stack, "base, adapter, master-base or master-adapter");
}

int cmd_simulate(const std::string& config_path, const Overrides& o) {
  auto c = nsbo::load_config(config_path);
  o.apply(c);
  const auto outputs = nsbo::run_experiment(c);
  std::cout << "config_hash " << outputs.hash << "\n";
  for (const auto& r : outputs.runs) {
    const double dyn = r.regret.empty() ? 0.0 : r.regret.back().cumulative_dynamic;
    std::cout << "seed " << r.seed << ": T=" << r.sequence.horizon() << " V_T=" << r.sequence.total_budget
              << " dynamic_regret=" << dyn << " restarts=" << r.trace.restarts.size()
              << " audit_violations=" << r.audit.property1_violations << "/" << r.audit.property2_violations
              << " of " << r.audit.in_scope << "\n";
  }
  for (const auto& f : outputs.files) std::cout << "wrote " << f.string() << "\n";
  return 0;
}

int cmd_audit(const std::string& config_path, const std::string& trace_path, const std::string& sequence_path,
              const std::string& out_path, const Overrides& o) {
  auto c = nsbo::load_config(config_path);
  o.apply(c);
  std::ifstream tin(trace_path);
  if (!tin) throw std::runtime_error("cannot open trace '" + trace_path + "'");
  std::ifstream sin(sequence_path);
  if (!sin) throw std::runtime_error("cannot open sequence '" + sequence_path + "'");
  const auto trace = nsbo::read_trace_csv(tin);
  const auto seq = nsbo::read_sequence_csv(sin);
  c.environment.horizon = seq.horizon();
  const auto cert = nsbo::certificate_for(c);
  const auto report = nsbo::audit_confidence(trace.y, trace.rbar, seq, cert.rho, cert.lambda);
  std::cout << "in_scope " << report.in_scope << "\n"
            << "property1_violations " << report.property1_violations << " rate " << report.property1_rate() << "\n"
            << "property2_violations " << report.property2_violations << " rate " << report.property2_rate() << "\n";
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open '" + out_path + "' for writing");
    nsbo::write_audit_csv(out, report, nsbo::config_hash(c));
    std::cout << "wrote " << out_path << "\n";
  }
  return 0;
}

int cmd_sweep(const std::string& config_path, const Overrides& o, int jobs) {
  std::ifstream in(config_path);
  if (!in) throw std::runtime_error("cannot open sweep spec '" + config_path + "'");
  auto spec = nsbo::sweep_from_json(nlohmann::json::parse(in));
  if (!o.seeds.empty()) spec.seeds = parse_seed_range(o.seeds);
  if (o.seed) spec.seeds = {*o.seed};
  if (!o.out.empty()) spec.output = o.out;
  if (o.kappa_scale) spec.base.algorithm.kappa_scale = *o.kappa_scale;
  if (!o.stack.empty()) spec.base.algorithm.stack = nsbo::stack_from_string(o.stack);
  if (jobs > 0) spec.jobs = jobs;
  const auto result = nsbo::sweep(spec);
  for (const auto& a : result.aggregates) {
    std::cout << "T=" << a.horizon << " V_T=" << a.budget << " n=" << a.count << " mean_regret=" << a.mean_regret
              << " stderr=" << a.stderr_regret << " mean_restarts=" << a.mean_restarts << "\n";
  }
  for (const auto& s : result.slopes) {
    std::cout << "V_T=" << s.budget << " slope=" << s.slope << " +- " << s.slope_stderr << "\n";
  }
  for (const auto& f : nsbo::write_sweep(spec, result)) std::cout << "wrote " << f.string() << "\n";
  const auto failed = std::count_if(result.rows.begin(), result.rows.end(), [](const auto& r) { return !r.ok; });
  if (failed) std::cerr << failed << " cell(s) failed; see sweep_errors.txt\n";
  return 0;
}

struct ParamArgs {
  double L = 1.0, sigma = 0.5, diameter = 2.0, c0 = 0.25, kappa_scale = 1.0;
  int d = 1;
  std::int64_t T = 1024;
};

int cmd_params(const ParamArgs& a) {
  const auto p = nsbo::derive_params(a.L, a.sigma, a.d, a.T, a.diameter, a.c0, a.kappa_scale);
  std::cout << std::setprecision(10);
  std::cout << "eta0 " << p.step_size << "\n"
            << "gamma " << p.contraction << "\n"
            << "N0 " << p.initial_batch << "\n"
            << "kappa0_theoretical " << p.theoretical_kappa << "\n"
            << "kappa0 " << p.ucb_constant << "\n"
            << "lambda " << p.lambda() << "\n";
  std::cout << "t,rho,rho_hat\n";
  const auto rho = nsbo::RhoFunction::inverse_sqrt(6.0 * p.ucb_constant, a.T);
  for (std::int64_t t = 1; t <= a.T; t *= 2) {
    std::cout << t << "," << nsbo::csv::format(rho(t)) << "," << nsbo::csv::format(nsbo::rho_hat(rho, t)) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive non-stationary bandit optimization: simulation and audit tools"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides overrides;

  auto* simulate = app.add_subcommand("simulate", "Run one experiment config over its seeds");
  simulate->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  add_overrides(simulate, overrides);

  std::string trace_path, sequence_path, audit_out;
  auto* audit = app.add_subcommand("audit", "Audit a trace against a sequence");
  audit->add_option("--config", config_path, "Experiment config the trace was produced with")
      ->required()
      ->check(CLI::ExistingFile);
  audit->add_option("--trace", trace_path, "Trace CSV")->required()->check(CLI::ExistingFile);
  audit->add_option("--sequence", sequence_path, "Sequence CSV")->required()->check(CLI::ExistingFile);
  audit->add_option("--report", audit_out, "Write the per-t audit CSV here");
  add_overrides(audit, overrides);

  int jobs = 0;
  auto* sweep = app.add_subcommand("sweep", "Run a (T, V_T, seed) grid");
  sweep->add_option("--config", config_path, "Sweep spec (JSON)")->required()->check(CLI::ExistingFile);
  sweep->add_option("--jobs", jobs, "Worker threads");
  add_overrides(sweep, overrides);

  ParamArgs pa;
  auto* params = app.add_subcommand("params", "Print derived constants and the rho(t) table");
  params->add_option("--L", pa.L, "Smoothness constant");
  params->add_option("--sigma", pa.sigma, "Strong concavity constant");
  params->add_option("--d", pa.d, "Dimension");
  params->add_option("--T", pa.T, "Horizon");
  params->add_option("--diameter", pa.diameter, "Domain diameter B_X");
  params->add_option("--c0", pa.c0, "Interior margin");
  params->add_option("--kappa-scale", pa.kappa_scale, "Multiplier on kappa0");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) return cmd_simulate(config_path, overrides);
    if (*audit) return cmd_audit(config_path, trace_path, sequence_path, audit_out, overrides);
    if (*sweep) return cmd_sweep(config_path, overrides, jobs);
    if (*params) return cmd_params(pa);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
