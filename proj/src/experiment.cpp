#include "nsbo/experiment.hpp"

#include "nsbo/csv.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace nsbo {

using nlohmann::json;

std::string to_string(Stack stack) {
  switch (stack) {
    case Stack::base: return "base";
    case Stack::adapter: return "adapter";
    case Stack::master_base: return "master-base";
    case Stack::master_adapter: return "master-adapter";
  }
  return "unknown";
}

Stack stack_from_string(const std::string& name) {
  if (name == "base") return Stack::base;
  if (name == "adapter") return Stack::adapter;
  if (name == "master-base") return Stack::master_base;
  if (name == "master-adapter") return Stack::master_adapter;
  throw std::invalid_argument("unknown stack '" + name + "' (expected base, adapter, master-base, master-adapter)");
}

namespace {

Point point_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Point>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json point_to_json(const Point& p) { return std::vector<double>(p.data(), p.data() + p.size()); }

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* n) { return k == n; })) {
      throw std::invalid_argument("config: unknown key '" + k + "' in " + where);
    }
  }
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  reject_unknown(j, {"environment", "algorithm", "seeds", "output"}, "top level");
  if (j.contains("environment")) {
    const auto& e = j.at("environment");
    reject_unknown(e, {"dimension", "center", "radius", "interior_margin", "noise", "horizon", "drift", "target_budget"},
                   "environment");
    int d = 1;
    read_opt(e, "dimension", d);
    if (d < 1) throw std::invalid_argument("config: dimension must be >= 1");
    c.environment.domain.center = e.contains("center") ? point_from_json(e.at("center")) : Point::Zero(d);
    if (c.environment.domain.center.size() != d) throw std::invalid_argument("config: center has wrong dimension");
    read_opt(e, "radius", c.environment.domain.radius);
    read_opt(e, "interior_margin", c.environment.domain.interior_margin);
    read_opt(e, "noise", c.environment.noise);
    read_opt(e, "horizon", c.environment.horizon);
    auto& dr = c.environment.drift;
    if (e.contains("drift")) {
      const auto& x = e.at("drift");
      reject_unknown(x, {"kind", "curvature", "peak_value", "start", "direction", "change_points", "jump_size",
                         "peak_jump", "velocity", "amplitude", "period", "step_scale", "seed"},
                     "environment.drift");
      if (x.contains("kind")) dr.kind = drift_kind_from_string(x.at("kind").get<std::string>());
      read_opt(x, "curvature", dr.curvature);
      read_opt(x, "peak_value", dr.peak_value);
      if (x.contains("start") && !x.at("start").is_null()) dr.start = point_from_json(x.at("start"));
      if (x.contains("direction") && !x.at("direction").is_null()) dr.direction = point_from_json(x.at("direction"));
      read_opt(x, "change_points", dr.change_points);
      read_opt(x, "jump_size", dr.jump_size);
      read_opt(x, "peak_jump", dr.peak_jump);
      read_opt(x, "velocity", dr.velocity);
      read_opt(x, "amplitude", dr.amplitude);
      read_opt(x, "period", dr.period);
      read_opt(x, "step_scale", dr.step_scale);
      read_opt(x, "seed", dr.seed);
    }
    if (e.contains("target_budget") && !e.at("target_budget").is_null()) {
      dr.target_budget = e.at("target_budget").get<double>();
    }
  }
  if (j.contains("algorithm")) {
    const auto& a = j.at("algorithm");
    reject_unknown(a, {"stack", "L", "sigma", "diameter", "c0", "kappa_scale", "arms", "ucb_width",
                       "certificate_constant"},
                   "algorithm");
    auto& al = c.algorithm;
    if (a.contains("stack")) al.stack = stack_from_string(a.at("stack").get<std::string>());
    read_opt(a, "L", al.smoothness);
    read_opt(a, "sigma", al.strong_concavity);
    if (a.contains("diameter") && !a.at("diameter").is_null()) al.diameter = a.at("diameter").get<double>();
    if (a.contains("c0") && !a.at("c0").is_null()) al.c0 = a.at("c0").get<double>();
    read_opt(a, "kappa_scale", al.kappa_scale);
    read_opt(a, "arms", al.arms);
    read_opt(a, "ucb_width", al.ucb_width);
    read_opt(a, "certificate_constant", al.certificate_constant);
  }
  if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  read_opt(j, "output", c.output);
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  const auto& e = c.environment;
  const auto& dr = e.drift;
  json drift = {{"kind", to_string(dr.kind)},
                {"curvature", dr.curvature},
                {"peak_value", dr.peak_value},
                {"start", dr.start.size() ? point_to_json(dr.start) : json(nullptr)},
                {"direction", dr.direction.size() ? point_to_json(dr.direction) : json(nullptr)},
                {"change_points", dr.change_points},
                {"jump_size", dr.jump_size},
                {"peak_jump", dr.peak_jump},
                {"velocity", dr.velocity},
                {"amplitude", dr.amplitude},
                {"period", dr.period},
                {"step_scale", dr.step_scale},
                {"seed", dr.seed}};
  json env = {{"dimension", e.domain.dimension()},
              {"center", point_to_json(e.domain.center)},
              {"radius", e.domain.radius},
              {"interior_margin", e.domain.interior_margin},
              {"noise", e.noise},
              {"horizon", e.horizon},
              {"drift", drift},
              {"target_budget", dr.target_budget ? json(*dr.target_budget) : json(nullptr)}};
  const auto& a = c.algorithm;
  json alg = {{"stack", to_string(a.stack)},
              {"L", a.smoothness},
              {"sigma", a.strong_concavity},
              {"diameter", a.diameter ? json(*a.diameter) : json(nullptr)},
              {"c0", a.c0 ? json(*a.c0) : json(nullptr)},
              {"kappa_scale", a.kappa_scale},
              {"arms", a.arms},
              {"ucb_width", a.ucb_width},
              {"certificate_constant", a.certificate_constant}};
  return {{"environment", env}, {"algorithm", alg}, {"seeds", c.seeds}, {"output", c.output}};
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  try {
    return config_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

std::string config_hash(const ExperimentConfig& c) {
  auto j = config_to_json(c);
  j.erase("output");
  j.erase("seeds");
  const std::string text = j.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over (seed, stream)
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

BaseParams base_params_for(const ExperimentConfig& c) {
  const auto& a = c.algorithm;
  const auto& dom = c.environment.domain;
  return derive_params(a.smoothness, a.strong_concavity, dom.dimension(), std::max(c.environment.horizon, 2),
                       a.diameter.value_or(dom.diameter()), a.c0.value_or(dom.interior_margin), a.kappa_scale);
}

namespace {

BallDomain algorithm_domain(const ExperimentConfig& c) {
  BallDomain d = c.environment.domain;
  if (c.algorithm.c0) d.interior_margin = *c.algorithm.c0;
  d.validate();
  return d;
}

GridUcbOptions grid_options(const ExperimentConfig& c) {
  GridUcbOptions o;
  o.width = c.algorithm.ucb_width;
  o.certificate_constant = c.algorithm.certificate_constant;
  o.lipschitz = c.algorithm.smoothness;
  return o;
}

void validate_config(const ExperimentConfig& c) {
  c.environment.domain.validate();
  if (c.environment.horizon < 1) throw std::invalid_argument("config: horizon must be >= 1");
  if (c.environment.noise < 0.0) throw std::invalid_argument("config: noise must be >= 0");
  if (c.seeds.empty()) throw std::invalid_argument("config: no seeds");
  if (c.algorithm.arms < 1) throw std::invalid_argument("config: arms must be >= 1");
  base_params_for(c);
  algorithm_domain(c);
}

}  // namespace

Certificate certificate_for(const ExperimentConfig& c) {
  const std::int64_t T = std::max(c.environment.horizon, 2);
  switch (c.algorithm.stack) {
    case Stack::base:
    case Stack::master_base: {
      const auto p = base_params_for(c);
      return {RhoFunction::inverse_sqrt(6.0 * p.ucb_constant, T), p.lambda()};
    }
    case Stack::adapter:
    case Stack::master_adapter: {
      std::shared_ptr<const StationaryPolicy> cert =
          grid_ucb_policy(algorithm_domain(c), c.algorithm.arms, T, grid_options(c));
      return {converted_rho_function([cert](double t) { return cert->certificate(t); }, T),
              StationaryAdapter::kLambda};
    }
  }
  throw std::logic_error("unreachable");
}

ObjectiveSequence build_sequence_for(const ExperimentConfig& c, std::uint64_t seed) {
  const Regularity reg{c.algorithm.strong_concavity, c.algorithm.smoothness};
  return build_sequence(c.environment.domain, c.environment.drift, c.environment.noise, c.environment.horizon,
                        derive_seed(seed, 0), reg);
}

MasterTrace run_single_policy(UcbPolicy& policy, Environment& env, std::int64_t T) {
  MasterTrace trace;
  trace.dimension = env.dimension();
  trace.steps.reserve(static_cast<std::size_t>(T));
  double running_min = 0.0;
  for (std::int64_t t = 1; t <= T; ++t) {
    const Point x = policy.next_action();
    const double y = env.query(static_cast<int>(t), x).value;
    const double rbar = policy.ingest(y);
    running_min = t == 1 ? rbar : std::min(running_min, rbar);
    trace.steps.push_back({t, 0, 0, x, y, rbar, running_min, false, 0});
  }
  return trace;
}

RunResult run_once(const ExperimentConfig& c, std::uint64_t seed) {
  validate_config(c);
  RunResult r;
  r.seed = seed;
  r.sequence = build_sequence_for(c, seed);
  Environment env(r.sequence, derive_seed(seed, 1));
  const std::int64_t T = c.environment.horizon;
  const std::int64_t T_params = std::max<std::int64_t>(T, 2);
  const BallDomain domain = algorithm_domain(c);

  switch (c.algorithm.stack) {
    case Stack::base: {
      BaseOptimizer base(base_params_for(c), domain);
      r.trace = run_single_policy(base, env, T);
      break;
    }
    case Stack::adapter: {
      auto adapter = wrap(grid_ucb_policy(domain, c.algorithm.arms, T_params, grid_options(c)), T_params);
      r.trace = run_single_policy(*adapter, env, T);
      break;
    }
    case Stack::master_base: {
      const auto params = base_params_for(c);
      auto rho = RhoFunction::inverse_sqrt(6.0 * params.ucb_constant, T_params);
      PolicyFactory factory = [params, domain] { return std::make_unique<BaseOptimizer>(params, domain); };
      r.trace = run_master(T, rho, factory, env, derive_seed(seed, 2));
      break;
    }
    case Stack::master_adapter: {
      const GridUcbPolicy prototype(domain, c.algorithm.arms, T_params, grid_options(c));
      validate_certificate([&](double t) { return prototype.certificate(t); }, T_params);
      auto rho = certificate_for(c).rho;
      PolicyFactory factory = [prototype, T_params] {
        return std::make_unique<StationaryAdapter>(prototype.clone(), T_params, false);
      };
      r.trace = run_master(T, rho, factory, env, derive_seed(seed, 2));
      break;
    }
  }
  std::vector<Point> actions;
  actions.reserve(r.trace.steps.size());
  for (const auto& s : r.trace.steps) actions.push_back(s.action);
  r.regret = regret_rows(actions, r.sequence);
  const auto cert = certificate_for(c);
  r.audit = audit_confidence(r.trace, r.sequence, cert.rho, cert.lambda);
  return r;
}

namespace {

void write_hash(std::ostream& out, const std::string& hash) {
  if (!hash.empty()) out << "# config_hash=" << hash << '\n';
}

}  // namespace

void write_trace_csv(std::ostream& out, const MasterTrace& trace, const std::string& hash) {
  write_hash(out, hash);
  std::vector<std::string> header{"t", "block_n", "thread_order"};
  for (int i = 1; i <= trace.dimension; ++i) header.push_back("x_" + std::to_string(i));
  for (const char* h : {"y", "rbar", "U", "restart_flag", "test_fired"}) header.emplace_back(h);
  csv::write_header(out, header);
  std::vector<double> row;
  for (const auto& s : trace.steps) {
    row.assign({static_cast<double>(s.t), static_cast<double>(s.block_order), static_cast<double>(s.thread_order)});
    for (int i = 0; i < trace.dimension; ++i) row.push_back(s.action[i]);
    row.insert(row.end(), {s.y, s.rbar, s.running_min, s.restart ? 1.0 : 0.0, static_cast<double>(s.test_fired)});
    csv::write_row(out, row);
  }
}

void write_restarts_csv(std::ostream& out, const MasterTrace& trace, const std::string& hash) {
  write_hash(out, hash);
  csv::write_header(out, {"t", "test", "thread_order", "block_n", "block_start"});
  for (const auto& e : trace.restarts) {
    csv::write_row(out, {static_cast<double>(e.t), static_cast<double>(e.test), static_cast<double>(e.thread_order),
                         static_cast<double>(e.block_order), static_cast<double>(e.block_start)});
  }
}

void write_regret_csv(std::ostream& out, const std::vector<RegretRow>& rows, const std::string& hash) {
  write_hash(out, hash);
  csv::write_header(out, {"t", "inst_regret", "cum_dynamic_regret", "cum_stationary_regret"});
  for (const auto& r : rows) {
    csv::write_row(out, {static_cast<double>(r.t), r.instantaneous, r.cumulative_dynamic, r.cumulative_stationary});
  }
}

void write_audit_csv(std::ostream& out, const AuditReport& report, const std::string& hash) {
  write_hash(out, hash);
  out << "# lambda=" << csv::format(report.lambda) << " in_scope=" << report.in_scope
      << " property1_violations=" << report.property1_violations
      << " property2_violations=" << report.property2_violations << '\n';
  csv::write_header(out, {"t", "in_scope", "property1", "property2", "rho", "delta_1t", "rbar", "min_fstar",
                          "mean_gap"});
  for (const auto& r : report.rows) {
    csv::write_row(out, {static_cast<double>(r.t), r.in_scope ? 1.0 : 0.0, r.property1 ? 1.0 : 0.0,
                         r.property2 ? 1.0 : 0.0, r.rho, r.variation, r.rbar, r.min_optimum, r.mean_gap});
  }
}

TraceColumns read_trace_csv(std::istream& in) {
  const auto table = csv::read(in);
  int d = 0;
  while (table.has_column("x_" + std::to_string(d + 1))) ++d;
  TraceColumns out;
  out.y = table.values("y");
  out.rbar = table.values("rbar");
  if (d > 0) {
    const auto c1 = table.column("x_1");
    for (const auto& r : table.rows) {
      Point x(d);
      for (int i = 0; i < d; ++i) x[i] = r[c1 + static_cast<std::size_t>(i)];
      out.actions.push_back(std::move(x));
    }
  }
  return out;
}

namespace {

std::ofstream open_output(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot open '" + p.string() + "' for writing");
  return out;
}

void close_output(std::ofstream& out, const std::filesystem::path& p) {
  out.close();
  if (!out) throw std::runtime_error("failed writing '" + p.string() + "'");
}

}  // namespace

ExperimentOutputs run_experiment(const ExperimentConfig& c) {
  validate_config(c);
  ExperimentOutputs outputs;
  outputs.hash = config_hash(c);
  const std::filesystem::path dir(c.output);
  std::filesystem::create_directories(dir);

  auto emit = [&](const std::string& kind, std::uint64_t seed, auto&& writer) {
    const auto p = dir / (kind + "_" + outputs.hash + "_" + std::to_string(seed) + ".csv");
    auto out = open_output(p);
    writer(out);
    close_output(out, p);
    outputs.files.push_back(p);
  };

  for (const auto seed : c.seeds) {
    auto run = run_once(c, seed);
    emit("trace", seed, [&](std::ostream& o) { write_trace_csv(o, run.trace, outputs.hash); });
    emit("restarts", seed, [&](std::ostream& o) { write_restarts_csv(o, run.trace, outputs.hash); });
    emit("regret", seed, [&](std::ostream& o) { write_regret_csv(o, run.regret, outputs.hash); });
    emit("audit", seed, [&](std::ostream& o) { write_audit_csv(o, run.audit, outputs.hash); });
    emit("sequence", seed, [&](std::ostream& o) {
      o << "# config_hash=" << outputs.hash << '\n';
      write_sequence_csv(o, run.sequence);
    });
    outputs.runs.push_back(std::move(run));
  }

  const auto p = dir / ("summary_" + outputs.hash + ".csv");
  auto out = open_output(p);
  write_hash(out, outputs.hash);
  csv::write_header(out, {"seed", "T", "total_budget", "dynamic_regret", "stationary_regret", "restarts",
                          "audit_in_scope", "property1_violations", "property2_violations"});
  for (const auto& r : outputs.runs) {
    const double dyn = r.regret.empty() ? 0.0 : r.regret.back().cumulative_dynamic;
    const double sta = r.regret.empty() ? 0.0 : r.regret.back().cumulative_stationary;
    csv::write_row(out, {static_cast<double>(r.seed), static_cast<double>(r.sequence.horizon()),
                         r.sequence.total_budget, dyn, sta, static_cast<double>(r.trace.restarts.size()),
                         static_cast<double>(r.audit.in_scope), static_cast<double>(r.audit.property1_violations),
                         static_cast<double>(r.audit.property2_violations)});
  }
  close_output(out, p);
  outputs.files.push_back(p);
  return outputs;
}

SweepSpec sweep_from_json(const json& j) {
  SweepSpec s;
  if (!j.contains("base")) throw std::invalid_argument("sweep: missing 'base' config");
  s.base = config_from_json(j.at("base"));
  read_opt(j, "horizons", s.horizons);
  read_opt(j, "budgets", s.budgets);
  if (j.contains("seeds")) {
    const auto& sd = j.at("seeds");
    if (sd.is_number_integer()) {
      for (std::uint64_t i = 1; i <= sd.get<std::uint64_t>(); ++i) s.seeds.push_back(i);
    } else {
      s.seeds = sd.get<std::vector<std::uint64_t>>();
    }
  } else {
    s.seeds = s.base.seeds;
  }
  read_opt(j, "output", s.output);
  read_opt(j, "jobs", s.jobs);
  return s;
}

std::pair<double, double> fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope fit: need >= 2 matched points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) throw std::invalid_argument("slope fit: values must be positive");
    lx.push_back(std::log2(x[i]));
    ly.push_back(std::log2(y[i]));
    mx += lx.back();
    my += ly.back();
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("slope fit: x values are all equal");
  const double slope = sxy / sxx;
  double sse = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (my + slope * (lx[i] - mx));
    sse += r * r;
  }
  const double se = x.size() > 2 ? std::sqrt(sse / (n - 2.0) / sxx) : 0.0;
  return {slope, se};
}

std::vector<SweepAggregate> aggregate(const std::vector<SweepRow>& rows) {
  std::vector<SweepAggregate> out;
  std::vector<std::pair<int, double>> keys;
  for (const auto& r : rows) {
    if (!r.ok) continue;
    const std::pair<int, double> k{r.horizon, r.budget};
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
  }
  std::sort(keys.begin(), keys.end());
  for (const auto& [T, V] : keys) {
    std::vector<double> vals;
    double restarts = 0.0;
    for (const auto& r : rows) {
      if (r.ok && r.horizon == T && r.budget == V) {
        vals.push_back(r.regret);
        restarts += r.restarts;
      }
    }
    const double n = static_cast<double>(vals.size());
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    const double se = vals.size() > 1 ? std::sqrt(var / (n - 1.0) / n) : 0.0;
    out.push_back({T, V, static_cast<int>(vals.size()), mean, se, restarts / n});
  }
  return out;
}

std::vector<SweepSlope> slopes(const std::vector<SweepAggregate>& aggregates) {
  std::vector<double> budgets;
  for (const auto& a : aggregates) {
    if (std::find(budgets.begin(), budgets.end(), a.budget) == budgets.end()) budgets.push_back(a.budget);
  }
  std::sort(budgets.begin(), budgets.end());
  std::vector<SweepSlope> out;
  for (double V : budgets) {
    std::vector<double> xs, ys;
    for (const auto& a : aggregates) {
      if (a.budget == V && a.mean_regret > 0.0) {
        xs.push_back(a.horizon);
        ys.push_back(a.mean_regret);
      }
    }
    if (xs.size() < 2) continue;
    const auto [slope, se] = fit_loglog_slope(xs, ys);
    out.push_back({V, slope, se, static_cast<int>(xs.size())});
  }
  return out;
}

SweepResult sweep(const SweepSpec& spec) {
  SweepResult result;
  result.hash = config_hash(spec.base);

  struct Cell {
    int horizon;
    double budget;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (int T : spec.horizons) {
    for (double V : spec.budgets) {
      for (auto seed : spec.seeds) cells.push_back({T, V, seed});
    }
  }
  result.rows.resize(cells.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const auto& cell = cells[i];
      ExperimentConfig c = spec.base;
      c.environment.horizon = cell.horizon;
      c.environment.drift.target_budget = cell.budget;
      SweepRow row{cell.horizon, cell.budget, cell.seed, 0.0, 0, 0.0, false, {}};
      const auto t0 = std::chrono::steady_clock::now();
      try {
        const auto run = run_once(c, cell.seed);
        row.regret = run.regret.empty() ? 0.0 : run.regret.back().cumulative_dynamic;
        row.restarts = static_cast<int>(run.trace.restarts.size());
        row.ok = true;
      } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
      }
      row.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      result.rows[i] = row;
    }
  };
  const int jobs = std::max(1, spec.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < jobs; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  result.aggregates = aggregate(result.rows);
  result.slopes = slopes(result.aggregates);
  return result;
}

void write_sweep_rows_csv(std::ostream& out, const std::vector<SweepRow>& rows, const std::string& hash) {
  write_hash(out, hash);
  csv::write_header(out, {"T", "V_T", "seed", "dynamic_regret", "restarts", "runtime_s", "ok"});
  for (const auto& r : rows) {
    csv::write_row(out, {static_cast<double>(r.horizon), r.budget, static_cast<double>(r.seed), r.regret,
                         static_cast<double>(r.restarts), r.runtime, r.ok ? 1.0 : 0.0});
  }
}

std::vector<SweepRow> read_sweep_rows_csv(std::istream& in) {
  const auto table = csv::read(in);
  const auto cT = table.column("T"), cV = table.column("V_T"), cs = table.column("seed"),
             cr = table.column("dynamic_regret"), cn = table.column("restarts"), ct = table.column("runtime_s"),
             co = table.column("ok");
  std::vector<SweepRow> rows;
  for (const auto& r : table.rows) {
    rows.push_back({static_cast<int>(r[cT]), r[cV], static_cast<std::uint64_t>(r[cs]), r[cr],
                    static_cast<int>(r[cn]), r[ct], r[co] != 0.0, {}});
  }
  return rows;
}

std::vector<std::filesystem::path> write_sweep(const SweepSpec& spec, const SweepResult& result) {
  const std::filesystem::path dir(spec.output);
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> files;

  auto p = dir / "sweep_rows.csv";
  auto out = open_output(p);
  write_sweep_rows_csv(out, result.rows, result.hash);
  close_output(out, p);
  files.push_back(p);

  p = dir / "sweep_aggregates.csv";
  out = open_output(p);
  write_hash(out, result.hash);
  csv::write_header(out, {"T", "V_T", "count", "mean_regret", "stderr_regret", "mean_restarts"});
  for (const auto& a : result.aggregates) {
    csv::write_row(out, {static_cast<double>(a.horizon), a.budget, static_cast<double>(a.count), a.mean_regret,
                         a.stderr_regret, a.mean_restarts});
  }
  close_output(out, p);
  files.push_back(p);

  p = dir / "sweep_slopes.csv";
  out = open_output(p);
  write_hash(out, result.hash);
  csv::write_header(out, {"V_T", "slope", "slope_stderr", "points"});
  for (const auto& s : result.slopes) {
    csv::write_row(out, {s.budget, s.slope, s.slope_stderr, static_cast<double>(s.points)});
  }
  close_output(out, p);
  files.push_back(p);

  p = dir / "sweep_errors.txt";
  out = open_output(p);
  for (const auto& r : result.rows) {
    if (!r.ok) out << "T=" << r.horizon << " V_T=" << csv::format(r.budget) << " seed=" << r.seed << ": " << r.error << '\n';
  }
  close_output(out, p);
  files.push_back(p);
  return files;
}

}  // namespace nsbo
