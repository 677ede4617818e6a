#pragma once

#include "nsbo/base_optimizer.hpp"
#include "nsbo/environment.hpp"
#include "nsbo/master_scheduler.hpp"
#include "nsbo/regret.hpp"
#include "nsbo/stationary_adapter.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace nsbo {

enum class Stack { base, adapter, master_base, master_adapter };

std::string to_string(Stack stack);
Stack stack_from_string(const std::string& name);

struct EnvironmentSpec {
  BallDomain domain{Point::Zero(1), 1.0, 0.25};
  DriftSchedule drift;
  double noise = 0.0;
  int horizon = 1024;
};

struct AlgorithmSpec {
  Stack stack = Stack::master_base;
  double smoothness = 1.0;        // L
  double strong_concavity = 0.5;  // sigma
  std::optional<double> diameter;  // B_X, defaults to 2R
  std::optional<double> c0;        // defaults to the domain margin
  double kappa_scale = 1.0;
  // grid UCB, used by the adapter stacks
  int arms = 16;
  double ucb_width = 2.0;
  double certificate_constant = 2.0;
};

struct ExperimentConfig {
  EnvironmentSpec environment;
  AlgorithmSpec algorithm;
  std::vector<std::uint64_t> seeds{1};
  std::string output = "out";
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);
ExperimentConfig load_config(const std::string& path);

/// 16 hex digits of FNV-1a over the canonical JSON form.
std::string config_hash(const ExperimentConfig& c);

/// Independent per-purpose seed derived from a run seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// The algorithm-side constants derived for a config (kappa0 etc.).
BaseParams base_params_for(const ExperimentConfig& c);

/// rho and lambda the selected stack is audited against.
struct Certificate {
  RhoFunction rho;
  double lambda;
};
Certificate certificate_for(const ExperimentConfig& c);

ObjectiveSequence build_sequence_for(const ExperimentConfig& c, std::uint64_t seed);

/// Runs one policy alone for T steps; the trace uses block 0, order 0 and a global running min.
MasterTrace run_single_policy(UcbPolicy& policy, Environment& env, std::int64_t T);

struct RunResult {
  std::uint64_t seed;
  ObjectiveSequence sequence;
  MasterTrace trace;
  std::vector<RegretRow> regret;
  AuditReport audit;
};

/// Runs the configured stack for one seed. Deterministic in (config, seed).
RunResult run_once(const ExperimentConfig& c, std::uint64_t seed);

void write_trace_csv(std::ostream& out, const MasterTrace& trace, const std::string& hash);
void write_restarts_csv(std::ostream& out, const MasterTrace& trace, const std::string& hash);
void write_regret_csv(std::ostream& out, const std::vector<RegretRow>& rows, const std::string& hash);
void write_audit_csv(std::ostream& out, const AuditReport& report, const std::string& hash);

/// y and rbar columns of a trace CSV.
struct TraceColumns {
  std::vector<Point> actions;
  std::vector<double> y;
  std::vector<double> rbar;
};
TraceColumns read_trace_csv(std::istream& in);

struct ExperimentOutputs {
  std::string hash;
  std::vector<std::filesystem::path> files;
  std::vector<RunResult> runs;
};

/// Runs every seed and writes trace, restarts, regret, audit, sequence and a
/// per-run summary under c.output. Invalid configs throw before any run.
ExperimentOutputs run_experiment(const ExperimentConfig& c);

struct SweepSpec {
  ExperimentConfig base;
  std::vector<int> horizons;
  std::vector<double> budgets;
  std::vector<std::uint64_t> seeds;
  std::string output = "sweep";
  int jobs = 1;
};

SweepSpec sweep_from_json(const nlohmann::json& j);

struct SweepRow {
  int horizon;
  double budget;
  std::uint64_t seed;
  double regret;
  int restarts;
  double runtime;
  bool ok;
  std::string error;
};

struct SweepAggregate {
  int horizon;
  double budget;
  int count;
  double mean_regret;
  double stderr_regret;
  double mean_restarts;
};

struct SweepSlope {
  double budget;
  double slope;
  double slope_stderr;
  int points;
};

struct SweepResult {
  std::string hash;
  std::vector<SweepRow> rows;
  std::vector<SweepAggregate> aggregates;
  std::vector<SweepSlope> slopes;
};

/// Least-squares slope of log2(y) on log2(x) and its standard error.
std::pair<double, double> fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

std::vector<SweepAggregate> aggregate(const std::vector<SweepRow>& rows);
std::vector<SweepSlope> slopes(const std::vector<SweepAggregate>& aggregates);

/// Runs every (T, V_T, seed) cell; failed cells are recorded and skipped.
SweepResult sweep(const SweepSpec& spec);

/// Writes sweep_rows.csv, sweep_aggregates.csv, sweep_slopes.csv and
/// sweep_errors.txt (one line per failed cell) under spec.output.
std::vector<std::filesystem::path> write_sweep(const SweepSpec& spec, const SweepResult& result);

void write_sweep_rows_csv(std::ostream& out, const std::vector<SweepRow>& rows, const std::string& hash);
std::vector<SweepRow> read_sweep_rows_csv(std::istream& in);

}  // namespace nsbo
