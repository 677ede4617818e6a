#include "nsbo/csv.hpp"
#include "nsbo/experiment.hpp"
#include "nsbo/regret.hpp"
#include "oracles.hpp"
#include "scripted.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace nsbo;
namespace fs = std::filesystem;

namespace {

Point vec(std::initializer_list<double> v) {
  Point p(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) p[i++] = x;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("nsbo_harness_" + name);
  fs::remove_all(p);
  return p;
}

ObjectiveSequence moving_sequence(int T) {
  DriftSchedule dr;
  dr.kind = DriftKind::sinusoidal;
  dr.curvature = 0.6;
  dr.peak_value = 0.3;
  dr.amplitude = 0.4;
  dr.period = 25;
  dr.direction = vec({1.0});
  return build_sequence(BallDomain(vec({0.0}), 1.0, 0.25), dr, 0.0, T, 1);
}

}  // namespace

TEST_CASE("csv number formatting round trips exactly") {
  Rng rng(5);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, i % 17 - 8);
    CHECK(std::stod(csv::format(v)) == v);
  }
}

TEST_CASE("dynamic regret") {
  const auto seq = moving_sequence(60);
  SUBCASE("playing every optimum gives zero") {
    std::vector<Point> xs;
    for (int t = 1; t <= 60; ++t) xs.push_back(seq.at(t).peak);
    CHECK(dynamic_regret(xs, seq) == 0.0);
  }
  SUBCASE("fixed action against direct summation") {
    const Point x = vec({-0.3});
    std::vector<Point> xs(60, x);
    double direct = 0.0;
    for (int t = 1; t <= 60; ++t) {
      const auto& f = seq.at(t);
      const double d = x[0] - f.peak[0];
      direct += f.peak_value - (f.peak_value - 0.5 * f.curvature * d * d);
    }
    CHECK(dynamic_regret(xs, seq) == doctest::Approx(direct).epsilon(1e-12));
  }
  SUBCASE("length mismatch") {
    CHECK_THROWS_AS(dynamic_regret(std::vector<Point>(3, vec({0.0})), seq), std::invalid_argument);
  }
}

TEST_CASE("stationary regret") {
  SUBCASE("T = 1 equals dynamic regret") {
    const auto seq = moving_sequence(1);
    const std::vector<Point> xs{vec({0.4})};
    CHECK(stationary_regret(xs, seq) == doctest::Approx(dynamic_regret(xs, seq)).epsilon(1e-14));
  }
  SUBCASE("two symmetric quadratics: best fixed point is the midpoint") {
    ObjectiveSequence seq{BallDomain(vec({0.0}), 1.0, 0.25), 0.0, {}, {}, 0.0};
    seq.objectives = {{0.2, 0.8, vec({0.5})}, {0.2, 0.8, vec({-0.5})}};
    seq.step_variation = {step_variation(seq.objectives[0], seq.objectives[1], seq.domain)};
    CHECK(best_fixed_point(seq, 1, 2)[0] == doctest::Approx(0.0));
    const double grid = oracle::grid_argmax_sum_1d({{0.2, 0.8, {0.5}}, {0.2, 0.8, {-0.5}}}, -1.0, 1.0, 200'001);
    CHECK(grid == doctest::Approx(0.0).scale(1.0).epsilon(1e-5));
  }
  SUBCASE("unequal weights against grid search") {
    ObjectiveSequence seq{BallDomain(vec({0.0}), 1.0, 0.25), 0.0, {}, {}, 0.0};
    seq.objectives = {{0.1, 0.3, vec({0.6})}, {0.2, 0.9, vec({-0.2})}, {0.0, 0.5, vec({0.1})}};
    const double grid = oracle::grid_argmax_sum_1d(
        {{0.1, 0.3, {0.6}}, {0.2, 0.9, {-0.2}}, {0.0, 0.5, {0.1}}}, -1.0, 1.0, 200'001);
    CHECK(best_fixed_point(seq, 1, 3)[0] == doctest::Approx(grid).scale(1.0).epsilon(1e-5));
  }
  SUBCASE("stationary sequence: both regrets coincide") {
    DriftSchedule dr;
    dr.curvature = 0.5;
    dr.start = vec({0.2});
    const auto seq = build_sequence(BallDomain(vec({0.0}), 1.0, 0.25), dr, 0.0, 40, 1);
    std::vector<Point> xs;
    for (int t = 0; t < 40; ++t) xs.push_back(vec({-0.5 + 0.02 * t}));
    CHECK(stationary_regret(xs, seq) == doctest::Approx(dynamic_regret(xs, seq)).epsilon(1e-12));
    const auto rows = regret_rows(xs, seq);
    CHECK(rows.back().cumulative_dynamic == doctest::Approx(dynamic_regret(xs, seq)));
    CHECK(rows.back().cumulative_stationary == doctest::Approx(stationary_regret(xs, seq)));
  }
}

TEST_CASE("audit flags exactly the injected violation") {
  auto seq = scripted::constant_sequence(std::vector<double>(20, 0.4));
  std::vector<double> y(20, 0.4), rbar(20, 0.45);
  rbar[11] = 0.3;  // below min f* = 0.4 with no variation
  const auto rho = RhoFunction::inverse_sqrt(1.0, 20);
  const auto report = audit_confidence(y, rbar, seq, rho, 6.0);
  CHECK(report.in_scope == 20);
  CHECK(report.property1_violations == 1);
  CHECK(report.property2_violations == 0);
  CHECK(!report.rows[11].property1);
}

TEST_CASE("audit scope excludes large variation") {
  std::vector<double> b(10, 0.1);
  for (int i = 5; i < 10; ++i) b[i] = 0.9;
  auto seq = scripted::constant_sequence(b);
  const auto rho = RhoFunction::inverse_sqrt(0.1, 10);
  const auto report = audit_confidence(std::vector<double>(10, 0.0), std::vector<double>(10, -1.0), seq, rho, 1.0);
  CHECK(report.rows[4].in_scope);
  CHECK(!report.rows[5].in_scope);
  CHECK(report.in_scope == 5);
  CHECK(report.property1_violations == 5);
}

TEST_CASE("config json") {
  ExperimentConfig c;
  c.environment.domain = BallDomain(vec({0.1, 0.2}), 1.5, 0.3);
  c.environment.drift.kind = DriftKind::random_walk;
  c.environment.drift.step_scale = 0.01;
  c.environment.drift.target_budget = 2.0;
  c.algorithm.stack = Stack::master_adapter;
  c.algorithm.kappa_scale = 1e-7;
  const auto j = config_to_json(c);
  const auto back = config_from_json(j);
  CHECK(config_to_json(back) == j);
  CHECK(config_hash(back) == config_hash(c));
  CHECK(config_hash(c).size() == 16);

  ExperimentConfig other = c;
  other.seeds = {4, 5};
  other.output = "elsewhere";
  CHECK(config_hash(other) == config_hash(c));
  other.algorithm.kappa_scale = 2e-7;
  CHECK(config_hash(other) != config_hash(c));

  auto bad = j;
  bad["environment"]["horizn"] = 5;
  CHECK_THROWS_AS(config_from_json(bad), std::invalid_argument);
}

TEST_CASE("derive_seed streams differ") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(7, 2) == derive_seed(7, 2));
}

TEST_CASE("single run of the base stack") {
  ExperimentConfig c;
  c.environment.horizon = 1 << 10;
  c.environment.drift.curvature = 0.5;
  c.environment.drift.peak_value = 0.3;
  c.environment.drift.start = vec({0.1});
  c.algorithm.stack = Stack::base;
  const auto r = run_once(c, 1);
  REQUIRE(r.regret.size() == 1024);
  const auto params = base_params_for(c);
  const double final_regret = r.regret.back().cumulative_dynamic;
  CHECK(final_regret >= 0.0);
  CHECK(final_regret / 1024.0 <= params.rho(1024.0));
  // sublinear: the second half costs less than the first
  CHECK(final_regret - r.regret[511].cumulative_dynamic <= r.regret[511].cumulative_dynamic);
}

TEST_CASE("T = 1 gives one row") {
  ExperimentConfig c;
  c.environment.horizon = 1;
  c.algorithm.stack = Stack::base;
  const auto r = run_once(c, 1);
  REQUIRE(r.regret.size() == 1);
  const auto& f = r.sequence.at(1);
  CHECK(r.regret[0].cumulative_dynamic == doctest::Approx(f.peak_value - f(r.trace.steps[0].action)));
}

TEST_CASE("run_experiment output is byte-identical across runs") {
  ExperimentConfig c;
  c.environment.horizon = 200;
  c.environment.noise = 0.1;
  c.environment.drift.curvature = 0.5;
  c.environment.drift.change_points = 2;
  c.environment.drift.jump_size = 0.3;
  c.environment.drift.direction = vec({1.0});
  c.algorithm.kappa_scale = 1e-6;
  c.seeds = {1, 2};
  c.output = scratch("a").string();
  const auto a = run_experiment(c);
  c.output = scratch("b").string();
  const auto b = run_experiment(c);
  REQUIRE(a.files.size() == b.files.size());
  CHECK(a.files.size() == 11);
  for (std::size_t i = 0; i < a.files.size(); ++i) {
    CHECK(a.files[i].filename() == b.files[i].filename());
    CHECK(slurp(a.files[i]) == slurp(b.files[i]));
    CHECK(slurp(a.files[i]).rfind("# config_hash=" + a.hash, 0) == 0);
  }

  // the trace CSV reproduces the in-memory audit
  std::ifstream tin(fs::path(c.output) / ("trace_" + a.hash + "_1.csv"));
  const auto cols = read_trace_csv(tin);
  const auto& run = a.runs[0];
  REQUIRE(cols.y.size() == run.trace.steps.size());
  const auto cert = certificate_for(c);
  const auto again = audit_confidence(cols.y, cols.rbar, run.sequence, cert.rho, cert.lambda);
  CHECK(again.property1_violations == run.audit.property1_violations);
  CHECK(again.property2_violations == run.audit.property2_violations);
  for (std::size_t i = 0; i < cols.y.size(); ++i) CHECK(cols.y[i] == run.trace.steps[i].y);
}

TEST_CASE("invalid configs throw before any run") {
  ExperimentConfig c;
  c.environment.drift.peak_value = 0.95;
  c.environment.noise = 0.2;
  c.output = scratch("bad").string();
  CHECK_THROWS_AS(run_experiment(c), std::invalid_argument);
  CHECK(!fs::exists(fs::path(c.output) / ("summary_" + config_hash(c) + ".csv")));
}

TEST_CASE("log-log slope fit") {
  std::vector<double> x, y;
  for (int k = 10; k <= 16; ++k) {
    x.push_back(std::ldexp(1.0, k));
    y.push_back(std::pow(x.back(), 2.0 / 3.0));
  }
  const auto [slope, se] = fit_loglog_slope(x, y);
  CHECK(slope == doctest::Approx(2.0 / 3.0).epsilon(1e-3));
  CHECK(se < 1e-9);
  CHECK_THROWS_AS(fit_loglog_slope({1024.0}, {5.0}), std::invalid_argument);
}

TEST_CASE("sweep") {
  SUBCASE("empty grid") {
    SweepSpec s;
    s.output = scratch("empty").string();
    const auto r = sweep(s);
    CHECK(r.rows.empty());
    CHECK(r.aggregates.empty());
    write_sweep(s, r);
    const auto text = slurp(fs::path(s.output) / "sweep_aggregates.csv");
    CHECK(text == "# config_hash=" + r.hash + "\nT,V_T,count,mean_regret,stderr_regret,mean_restarts\n");
  }
  SUBCASE("small grid, parallel equals serial") {
    nlohmann::json j = {{"base", config_to_json(ExperimentConfig{})},
                        {"horizons", {64, 128}},
                        {"budgets", {0.0, 0.5}},
                        {"seeds", 2}};
    j["base"]["environment"]["drift"]["kind"] = "random_walk";
    j["base"]["environment"]["drift"]["step_scale"] = 0.01;
    j["base"]["environment"]["drift"]["curvature"] = 0.5;
    j["base"]["algorithm"]["kappa_scale"] = 1e-6;
    auto s = sweep_from_json(j);
    CHECK(s.seeds == std::vector<std::uint64_t>{1, 2});
    const auto serial = sweep(s);
    s.jobs = 4;
    const auto parallel = sweep(s);
    REQUIRE(serial.rows.size() == 8);
    for (std::size_t i = 0; i < 8; ++i) {
      CHECK(serial.rows[i].ok);
      CHECK(serial.rows[i].regret == parallel.rows[i].regret);
    }
    CHECK(serial.aggregates.size() == 4);
    CHECK(serial.slopes.size() == 2);

    std::stringstream ss;
    write_sweep_rows_csv(ss, serial.rows, serial.hash);
    const auto back = read_sweep_rows_csv(ss);
    REQUIRE(back.size() == 8);
    CHECK(back[3].regret == serial.rows[3].regret);
    CHECK(back[3].seed == serial.rows[3].seed);
  }
  SUBCASE("an unreachable budget is recorded, not fatal") {
    SweepSpec s;
    s.base.environment.drift.curvature = 0.5;
    s.horizons = {64};
    s.budgets = {0.0, 1e6};
    s.seeds = {1};
    s.output = scratch("err").string();
    const auto r = sweep(s);
    REQUIRE(r.rows.size() == 2);
    CHECK(r.rows[0].ok);
    CHECK(!r.rows[1].ok);
    CHECK(!r.rows[1].error.empty());
    write_sweep(s, r);
    CHECK(slurp(fs::path(s.output) / "sweep_errors.txt").find("T=64 V_T=1e+06 seed=1: ") != std::string::npos);
  }
}
