#include "nsbo/experiment.hpp"
#include "nsbo/stationary_adapter.hpp"

#include <doctest.h>

#include <cmath>

using namespace nsbo;

namespace {

Point vec(std::initializer_list<double> v) {
  Point p(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) p[i++] = x;
  return p;
}

}  // namespace

TEST_CASE("adapter_ucb") {
  CHECK(adapter_ucb(4, 2.0, 0.5, 8) == doctest::Approx(1.8326).epsilon(1e-4));
  CHECK(std::log(16.0) == doctest::Approx(2.7726).epsilon(1e-4));
  for (int t = 1; t <= 50; ++t) CHECK(adapter_ucb(t, 0.0, 0.0, 50) == doctest::Approx(std::sqrt(std::log(100.0) / t)));
  CHECK_THROWS_AS(adapter_ucb(0, 0.0, 0.0, 8), std::invalid_argument);
  CHECK_THROWS_AS(adapter_ucb(9, 0.0, 0.0, 8), std::invalid_argument);
}

TEST_CASE("converted radius") {
  StationaryAdapter a(std::make_unique<FixedPointPolicy>(vec({0.0}), [](double t) { return 0.3 / std::sqrt(t); }),
                      64);
  for (double t : {1.0, 7.0, 64.0}) {
    CHECK(a.converted_rho(t) == doctest::Approx(0.6 / std::sqrt(t) + 3.0 * std::sqrt(std::log(128.0) / t)));
    CHECK(a.rho_function()(t) == doctest::Approx(a.converted_rho(t)));
  }
  CHECK(StationaryAdapter::kLambda == 2.0);
  CHECK_NOTHROW(a.rho_function().validate());
}

TEST_CASE("certificate validation") {
  CHECK_THROWS_AS(wrap(std::make_unique<FixedPointPolicy>(vec({0.0}), [](double t) { return t; }), 10),
                  std::invalid_argument);
  CHECK_THROWS_AS(wrap(std::make_unique<FixedPointPolicy>(vec({0.0}), [](double t) { return 1.0 / (t * t); }), 10),
                  std::invalid_argument);
  CHECK_NOTHROW(wrap(std::make_unique<FixedPointPolicy>(vec({0.0}), [](double) { return 0.2; }), 10));
}

TEST_CASE("oracle policy: rbar never below the optimum") {
  const QuadraticObjective f{0.4, 0.7, vec({0.2, -0.1})};
  StationaryAdapter a(std::make_unique<FixedPointPolicy>(f.peak), 500);
  for (int t = 1; t <= 500; ++t) {
    const double y = f(a.next_action());
    CHECK(y == 0.4);
    CHECK(a.ingest(y) >= 0.4);
  }
  CHECK_THROWS_AS(a.ingest(0.4), std::logic_error);
}

TEST_CASE("clone copies the running sum and the inner policy") {
  const BallDomain dom(vec({0.0}), 1.0, 0.25);
  StationaryAdapter a(grid_ucb_policy(dom, 5, 100), 100);
  for (int t = 0; t < 7; ++t) a.ingest(0.1 * t);
  auto b = a.clone();
  CHECK(b->clock() == 7);
  CHECK(b->next_action() == a.next_action());
  CHECK(b->ingest(0.3) == a.ingest(0.3));
}

TEST_CASE("grid UCB") {
  const BallDomain dom(vec({0.0}), 1.0, 0.25);

  SUBCASE("K = 1") {
    GridUcbOptions o;
    o.certificate_constant = 3.0;
    o.lipschitz = 0.5;
    GridUcbPolicy p(dom, 1, 100, o);
    REQUIRE(p.arms().size() == 1);
    CHECK(p.spacing() == doctest::Approx(1.5));
    for (int t = 1; t <= 10; ++t) {
      CHECK(p.next_action() == dom.center);
      CHECK(p.certificate(t) == doctest::Approx(3.0 * 0.5 * 1.5));
      p.ingest(0.1);
    }
  }

  SUBCASE("K = 3, noiseless, unique best arm") {
    // Arms -0.75, 0, 0.75; f(x) = 0.5 - (x - 0.6)^2 / 2 gives -0.41125, 0.32, 0.48875.
    GridUcbOptions o;
    o.width = 0.1;
    GridUcbPolicy p(dom, 3, 100, o);
    REQUIRE(p.arms().size() == 3);
    CHECK(p.arms()[0][0] == doctest::Approx(-0.75));
    CHECK(p.arms()[1][0] == doctest::Approx(0.0));
    CHECK(p.arms()[2][0] == doctest::Approx(0.75));
    const QuadraticObjective f{0.5, 1.0, vec({0.6})};
    // Steps 1-3 sweep the arms. Afterwards the index of arm 2 is
    // 0.48875 + 0.1 sqrt(ln 300 / n) and beats 0.32 + 0.1 sqrt(ln 300) while n <= 11.
    std::vector<std::size_t> played;
    for (int t = 1; t <= 10; ++t) {
      played.push_back(p.current_arm());
      p.ingest(f(p.next_action()));
    }
    CHECK(played == std::vector<std::size_t>{0, 1, 2, 2, 2, 2, 2, 2, 2, 2});
  }

  SUBCASE("two dimensions keep arms inside the interior ball") {
    const BallDomain disk(vec({0.3, 0.1}), 1.0, 0.25);
    GridUcbPolicy p(disk, 25, 100);
    CHECK(p.arms().size() > 1);
    CHECK(p.arms().size() <= 25);
    for (const auto& a : p.arms()) CHECK(disk.in_interior(a, 1e-12));
  }

  SUBCASE("certificate shape") {
    GridUcbPolicy p(dom, 4, 64);
    const double K = 4.0, h = 0.5;
    for (double t : {1.0, 10.0, 64.0}) {
      CHECK(p.certificate(t) == doctest::Approx(2.0 * (std::sqrt(K * std::log(K * 64) / t) + h)));
    }
    CHECK_NOTHROW(validate_certificate([&](double t) { return p.certificate(t); }, 64));
  }
}

TEST_CASE("wrapped grid UCB under the scheduler completes end to end") {
  ExperimentConfig c;
  c.environment.horizon = 2048;
  c.environment.noise = 0.1;
  c.environment.drift.kind = DriftKind::piecewise_constant;
  c.environment.drift.peak_value = 0.3;
  c.environment.drift.start = vec({-0.2});
  c.environment.drift.curvature = 0.5;
  c.environment.drift.direction = vec({1.0});
  c.environment.drift.change_points = 1;
  c.environment.drift.jump_size = 0.5;
  c.algorithm.stack = Stack::master_adapter;
  c.algorithm.arms = 8;
  const auto r = run_once(c, 1);
  REQUIRE(r.trace.steps.size() == 2048);
  for (const auto& s : r.trace.steps) {
    CHECK(std::isfinite(s.rbar));
    CHECK(c.environment.domain.in_interior(s.action, 1e-12));
  }
  CHECK(r.audit.lambda == StationaryAdapter::kLambda);
}

TEST_CASE("wrapped grid UCB audit, small run") {
  ExperimentConfig c;
  c.environment.horizon = 1024;
  c.environment.noise = 0.2;
  c.environment.drift.peak_value = 0.4;
  c.environment.drift.start = vec({0.15});
  c.environment.drift.curvature = 0.5;
  c.algorithm.stack = Stack::adapter;
  c.algorithm.arms = 8;
  int in_scope = 0, bad = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto r = run_once(c, seed);
    in_scope += r.audit.in_scope;
    bad += r.audit.property1_violations + r.audit.property2_violations;
  }
  CHECK(in_scope > 0);
  CHECK(bad < 0.01 * in_scope);
}
