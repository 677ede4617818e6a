#include "nsbo/environment.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <sstream>

using namespace nsbo;

namespace {

Point vec(std::initializer_list<double> v) {
  Point p(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) p[i++] = x;
  return p;
}

oracle::Quad as_oracle(const QuadraticObjective& f) {
  return {f.peak_value, f.curvature, std::vector<double>(f.peak.data(), f.peak.data() + f.peak.size())};
}

BallDomain unit_line(double c0 = 0.2) { return BallDomain(vec({0.0}), 1.0, c0); }

}  // namespace

TEST_CASE("domain validation") {
  CHECK_THROWS_AS(BallDomain(vec({0.0}), 0.2, 0.25), std::invalid_argument);
  CHECK_THROWS_AS(BallDomain(vec({0.0}), 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(BallDomain(Point(0), 1.0, 0.25), std::invalid_argument);
  const BallDomain d(vec({0.0, 0.0}), 1.5, 0.25);
  CHECK(d.diameter() == doctest::Approx(3.0));
  CHECK(d.interior_radius() == doctest::Approx(1.25));
}

TEST_CASE("evaluate") {
  const QuadraticObjective f{0.5, 1.0, vec({0.0})};
  CHECK(evaluate(f, vec({0.0})) == 0.5);
  CHECK(evaluate(f, vec({0.2})) == doctest::Approx(0.48).epsilon(1e-15));

  const QuadraticObjective g{0.3, 0.7, vec({0.1, -0.2})};
  const Point v = vec({0.13, 0.05});
  CHECK(evaluate(g, g.peak + v) == doctest::Approx(evaluate(g, g.peak - v)).epsilon(1e-15));
}

TEST_CASE("optimum") {
  const QuadraticObjective f{0.25, 0.8, vec({0.3, -0.1})};
  const auto opt = optimum(f);
  CHECK(opt.point == f.peak);
  CHECK(opt.value == 0.25);
  CHECK(evaluate(f, opt.point) == opt.value);
}

TEST_CASE("project_interior") {
  const BallDomain d(vec({0.0, 0.0}), 1.0, 0.2);
  SUBCASE("interior point is unchanged") { CHECK(project_interior(d, vec({0.3, -0.4})) == vec({0.3, -0.4})); }
  SUBCASE("radial scaling") {
    const Point p = project_interior(d, vec({2.0, 0.0}));
    CHECK(p[0] == doctest::Approx(0.8));
    CHECK(p[1] == doctest::Approx(0.0));
  }
  SUBCASE("idempotent, bounded and non-expansive on random pairs") {
    Rng rng(7);
    std::normal_distribution<double> n(0.0, 2.0);
    const BallDomain off(vec({0.5, -1.0}), 2.0, 0.3);
    for (int i = 0; i < 2000; ++i) {
      const Point a = vec({n(rng), n(rng)}) + off.center;
      const Point b = vec({n(rng), n(rng)}) + off.center;
      const Point pa = project_interior(off, a);
      const Point pb = project_interior(off, b);
      CHECK((pa - off.center).norm() <= off.interior_radius() + 1e-12);
      CHECK((pa - pb).norm() <= (a - b).norm() + 1e-12);
      CHECK((project_interior(off, pa) - pa).norm() <= 1e-15);
    }
  }
}

TEST_CASE("step_variation against brute force") {
  const BallDomain line = BallDomain(vec({0.0}), 1.0, 0.25);

  SUBCASE("identical objectives") {
    const QuadraticObjective f{0.2, 1.0, vec({0.1})};
    CHECK(step_variation(f, f, line) == 0.0);
  }

  SUBCASE("one-dimensional jump example") {
    const QuadraticObjective a{0.0, 1.0, vec({0.0})};
    const QuadraticObjective b{0.0, 1.0, vec({0.1})};
    // Brute force over 10^6 grid points on [-1, 1].
    const double brute = oracle::grid_sup_diff_1d(as_oracle(a), as_oracle(b), 0.0, 1.0, 1'000'000);
    CHECK(brute == doctest::Approx(0.105).epsilon(1e-9));
    CHECK(step_variation(a, b, line) == doctest::Approx(0.105).epsilon(1e-12));
    CHECK(step_variation(b, a, line) == doctest::Approx(0.105).epsilon(1e-12));
  }

  SUBCASE("unequal curvatures, off-center domain") {
    const BallDomain shifted(vec({0.3}), 0.8, 0.2);
    Rng rng(11);
    std::uniform_real_distribution<double> u(-0.5, 0.5), s(0.2, 1.0);
    for (int i = 0; i < 20; ++i) {
      const QuadraticObjective a{u(rng) * 0.4, s(rng), vec({0.3 + u(rng)})};
      const QuadraticObjective b{u(rng) * 0.4, s(rng), vec({0.3 + u(rng)})};
      const double brute = oracle::grid_sup_diff_1d(as_oracle(a), as_oracle(b), 0.3, 0.8, 200'001);
      CHECK(step_variation(a, b, shifted) == doctest::Approx(brute).epsilon(1e-6));
      CHECK(step_variation(a, b, shifted) == doctest::Approx(step_variation(b, a, shifted)).epsilon(1e-13));
    }
  }

  SUBCASE("two dimensions against a polar grid") {
    const BallDomain disk(vec({0.1, -0.2}), 1.0, 0.25);
    Rng rng(3);
    std::uniform_real_distribution<double> u(-0.5, 0.5), s(0.3, 1.0);
    for (int i = 0; i < 10; ++i) {
      const bool same = i % 2 == 0;
      const double sa = s(rng);
      const QuadraticObjective a{u(rng) * 0.3, sa, disk.center + vec({u(rng), u(rng)})};
      const QuadraticObjective b{u(rng) * 0.3, same ? sa : s(rng), disk.center + vec({u(rng), u(rng)})};
      const double brute =
          oracle::polar_sup_diff_2d(as_oracle(a), as_oracle(b), {0.1, -0.2}, 1.0, 400, 4000);
      const double exact = step_variation(a, b, disk);
      CHECK(exact >= brute - 1e-12);
      CHECK(exact == doctest::Approx(brute).epsilon(1e-4));
    }
  }

  SUBCASE("dimension mismatch") {
    const QuadraticObjective a{0.0, 1.0, vec({0.0, 0.0})};
    CHECK_THROWS_AS(step_variation(a, a, line), std::invalid_argument);
  }
}

TEST_CASE("build_sequence") {
  const BallDomain dom = unit_line(0.25);

  SUBCASE("no change points means no variation") {
    DriftSchedule dr;
    dr.kind = DriftKind::piecewise_constant;
    dr.start = vec({0.3});
    const auto seq = build_sequence(dom, dr, 0.1, 50, 1);
    CHECK(seq.horizon() == 50);
    CHECK(seq.total_budget == 0.0);
    for (double v : seq.step_variation) CHECK(v == 0.0);
  }

  SUBCASE("single jump has the closed-form variation") {
    DriftSchedule dr;
    dr.kind = DriftKind::piecewise_constant;
    dr.curvature = 1.0;
    dr.peak_value = 0.0;
    dr.start = vec({0.0});
    dr.direction = vec({1.0});
    dr.change_points = 1;
    dr.jump_size = 0.1;
    const auto seq = build_sequence(dom, dr, 0.0, 10, 1);
    CHECK(seq.total_budget == doctest::Approx(0.105));
    CHECK(seq.step_variation[4] == doctest::Approx(0.105));  // f_5 -> f_6
  }

  SUBCASE("deterministic in the seed") {
    DriftSchedule dr;
    dr.kind = DriftKind::sinusoidal;
    dr.amplitude = 0.3;
    dr.period = 40;
    dr.seed = 5;
    Point a = vec({0.0});
    const auto s1 = build_sequence(BallDomain(vec({0.0, 0.0}), 1.0, 0.25), dr, 0.1, 200, 9);
    const auto s2 = build_sequence(BallDomain(vec({0.0, 0.0}), 1.0, 0.25), dr, 0.1, 200, 9);
    for (int t = 1; t <= 200; ++t) CHECK(s1.at(t).peak == s2.at(t).peak);
    CHECK(s1.total_budget == s2.total_budget);
  }

  SUBCASE("every kind: budget sums, pointwise bound on a grid, peaks interior") {
    const BallDomain disk(vec({0.0, 0.0}), 1.0, 0.25);
    for (auto kind : {DriftKind::piecewise_constant, DriftKind::linear_drift, DriftKind::sinusoidal,
                      DriftKind::random_walk}) {
      DriftSchedule dr;
      dr.kind = kind;
      dr.curvature = 0.5;
      dr.peak_value = 0.4;
      dr.change_points = 3;
      dr.jump_size = 0.4;
      dr.peak_jump = 0.1;
      dr.velocity = 0.01;
      dr.amplitude = 0.5;
      dr.period = 30;
      dr.step_scale = 0.05;
      dr.seed = 17;
      const auto seq = build_sequence(disk, dr, 0.1, 120, 4);
      double sum = 0.0;
      for (double v : seq.step_variation) sum += v;
      CHECK(sum == doctest::Approx(seq.total_budget).epsilon(1e-12));
      for (int t = 1; t <= seq.horizon(); ++t) CHECK(disk.in_interior(seq.at(t).peak));
      for (int t = 1; t < seq.horizon(); ++t) {
        const double bound = seq.step_variation[static_cast<std::size_t>(t - 1)];
        for (int i = -10; i <= 10; ++i) {
          for (int j = -10; j <= 10; ++j) {
            const Point x = vec({i / 10.0, j / 10.0});
            if (!disk.contains(x)) continue;
            CHECK(std::abs(seq.at(t + 1)(x) - seq.at(t)(x)) <= bound + 1e-9);
          }
        }
      }
    }
  }

  SUBCASE("target budget is met within 1%") {
    for (auto kind : {DriftKind::piecewise_constant, DriftKind::linear_drift, DriftKind::random_walk}) {
      DriftSchedule dr;
      dr.kind = kind;
      dr.curvature = 0.5;
      dr.peak_value = 0.3;
      dr.start = vec({0.1});
      dr.change_points = 8;
      dr.jump_size = 0.1;
      dr.velocity = 0.001;
      dr.step_scale = 0.01;
      for (double target : {0.0, 0.5, 2.0}) {
        dr.target_budget = target;
        const auto seq = build_sequence(dom, dr, 0.2, 2000, 3);
        CHECK(std::abs(seq.total_budget - target) <= 0.01 * target + 1e-15);
      }
    }
  }

  SUBCASE("rejections") {
    DriftSchedule dr;
    dr.peak_value = 0.9;
    CHECK_THROWS_AS(build_sequence(dom, dr, 0.2, 10, 1), std::invalid_argument);  // |f| + noise > 1

    DriftSchedule far;
    far.start = vec({0.9});
    CHECK_THROWS_AS(build_sequence(dom, far, 0.0, 10, 1), std::invalid_argument);  // outside X°(c0)

    DriftSchedule jump;
    jump.start = vec({0.5});
    jump.direction = vec({1.0});
    jump.change_points = 1;
    jump.jump_size = 0.5;
    CHECK_THROWS_AS(build_sequence(dom, jump, 0.0, 10, 1), std::invalid_argument);

    DriftSchedule steep;
    steep.curvature = 1.0;
    CHECK_THROWS_AS(build_sequence(dom, steep, 0.0, 10, 1, Regularity{0.1, 0.5}), std::invalid_argument);
    CHECK_NOTHROW(build_sequence(dom, steep, 0.0, 10, 1, Regularity{0.5, 2.0}));
  }
}

TEST_CASE("sample_feedback") {
  const QuadraticObjective f{0.2, 1.0, vec({0.1})};
  const Point x = vec({0.4});
  SUBCASE("noiseless") {
    Rng rng(1);
    const auto s = sample_feedback(f, x, 0.0, rng);
    CHECK(s.value == s.mean);
    CHECK(s.mean == f(x));
  }
  SUBCASE("unbiased and bounded") {
    const double nu = 0.5;
    Rng rng(2);
    const int n = 100'000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto s = sample_feedback(f, x, nu, rng);
      CHECK(std::abs(s.value) <= 1.0);
      sum += s.value;
    }
    // Uniform[-nu, nu] has standard deviation nu / sqrt(3).
    CHECK(std::abs(sum / n - f(x)) <= 3.0 * nu / std::sqrt(3.0 * n));
  }
  SUBCASE("same seed, same samples") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(sample_feedback(f, x, 0.3, a).value == sample_feedback(f, x, 0.3, b).value);
  }
}

TEST_CASE("sequence CSV round trip") {
  DriftSchedule dr;
  dr.kind = DriftKind::random_walk;
  dr.step_scale = 0.05;
  dr.seed = 8;
  const auto seq = build_sequence(BallDomain(vec({0.0, 0.0, 0.0}), 1.0, 0.3), dr, 0.1, 64, 2);
  std::stringstream ss;
  write_sequence_csv(ss, seq);
  const auto back = read_sequence_csv(ss);
  REQUIRE(back.horizon() == seq.horizon());
  for (int t = 1; t <= seq.horizon(); ++t) {
    CHECK(back.at(t).peak == seq.at(t).peak);
    CHECK(back.at(t).peak_value == seq.at(t).peak_value);
  }
  CHECK(back.step_variation == seq.step_variation);
}
