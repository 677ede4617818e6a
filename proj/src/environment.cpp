#include "nsbo/environment.hpp"

#include "nsbo/csv.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace nsbo {

BallDomain::BallDomain(Point c, double r, double c0)
    : center(std::move(c)), radius(r), interior_margin(c0) {
  validate();
}

void BallDomain::validate() const {
  if (center.size() < 1) throw std::invalid_argument("domain: dimension must be >= 1");
  if (!(interior_margin > 0.0 && interior_margin < 1.0)) {
    throw std::invalid_argument("domain: interior margin c0 must lie in (0, 1)");
  }
  if (!(radius > interior_margin)) {
    throw std::invalid_argument("domain: radius must exceed the interior margin");
  }
}

bool BallDomain::contains(const Point& x, double tol) const {
  return (x - center).norm() <= radius + tol;
}

bool BallDomain::in_interior(const Point& x, double tol) const {
  return (x - center).norm() <= interior_radius() + tol;
}

double QuadraticObjective::operator()(const Point& x) const {
  return peak_value - 0.5 * curvature * (x - peak).squaredNorm();
}

Point QuadraticObjective::gradient(const Point& x) const { return -curvature * (x - peak); }

double evaluate(const QuadraticObjective& obj, const Point& x) { return obj(x); }

Optimum optimum(const QuadraticObjective& obj) { return {obj.peak, obj.peak_value}; }

double sup_abs_value(const QuadraticObjective& obj, const BallDomain& domain) {
  const double far = (obj.peak - domain.center).norm() + domain.radius;
  const double lowest = obj.peak_value - 0.5 * obj.curvature * far * far;
  return std::max(std::abs(obj.peak_value), std::abs(lowest));
}

double sup_gradient_norm(const QuadraticObjective& obj, const BallDomain& domain) {
  return obj.curvature * ((obj.peak - domain.center).norm() + domain.radius);
}

double step_variation(const QuadraticObjective& a, const QuadraticObjective& b,
                      const BallDomain& domain) {
  const auto d = domain.center.size();
  if (a.peak.size() != d || b.peak.size() != d) {
    throw std::invalid_argument("step_variation: dimension mismatch");
  }
  // g(x) = b(x) - a(x)
  if (a.curvature == b.curvature) {
    const double s = a.curvature;
    const Point w = s * (b.peak - a.peak);
    const double k = (b.peak_value - a.peak_value) + 0.5 * s * (a.peak.squaredNorm() - b.peak.squaredNorm());
    return std::abs(w.dot(domain.center) + k) + w.norm() * domain.radius;
  }
  // g(x) = alpha * ||x - p||^2 + beta
  const double alpha = 0.5 * (a.curvature - b.curvature);
  const Point p = (a.curvature * a.peak - b.curvature * b.peak) / (a.curvature - b.curvature);
  const double beta = (b.peak_value - a.peak_value) - 0.5 * b.curvature * (p - b.peak).squaredNorm() +
                      0.5 * a.curvature * (p - a.peak).squaredNorm();
  const double dist = (p - domain.center).norm();
  const double near = std::max(0.0, dist - domain.radius);
  const double far = dist + domain.radius;
  return std::max(std::abs(alpha * near * near + beta), std::abs(alpha * far * far + beta));
}

namespace {

Point project_ball(const Point& center, double radius, const Point& z) {
  const Point off = z - center;
  const double n = off.norm();
  if (n <= radius) return z;
  return center + (radius / n) * off;
}

}  // namespace

Point project_interior(const BallDomain& domain, const Point& z) {
  return project_ball(domain.center, domain.interior_radius(), z);
}

Point project_domain(const BallDomain& domain, const Point& z) {
  return project_ball(domain.center, domain.radius, z);
}

std::string to_string(DriftKind kind) {
  switch (kind) {
    case DriftKind::piecewise_constant: return "piecewise_constant";
    case DriftKind::linear_drift: return "linear_drift";
    case DriftKind::sinusoidal: return "sinusoidal";
    case DriftKind::random_walk: return "random_walk";
  }
  return "unknown";
}

DriftKind drift_kind_from_string(const std::string& name) {
  if (name == "piecewise_constant") return DriftKind::piecewise_constant;
  if (name == "linear_drift") return DriftKind::linear_drift;
  if (name == "sinusoidal") return DriftKind::sinusoidal;
  if (name == "random_walk") return DriftKind::random_walk;
  throw std::invalid_argument("unknown drift kind '" + name + "'");
}

std::vector<double> ObjectiveSequence::cumulative_variation() const {
  std::vector<double> out(objectives.size(), 0.0);
  for (std::size_t i = 1; i < out.size(); ++i) out[i] = out[i - 1] + step_variation[i - 1];
  return out;
}

namespace {

struct DriftPlan {
  Point start;
  Point direction;
  std::vector<Point> walk;  // pre-drawn Gaussian increments
};

DriftPlan plan_drift(const BallDomain& domain, const DriftSchedule& drift, int horizon,
                     std::uint64_t rng_seed) {
  const int d = domain.dimension();
  std::seed_seq seq{static_cast<std::uint32_t>(drift.seed), static_cast<std::uint32_t>(drift.seed >> 32),
                    static_cast<std::uint32_t>(rng_seed), static_cast<std::uint32_t>(rng_seed >> 32)};
  Rng rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);

  DriftPlan plan;
  plan.start = drift.start.size() == 0 ? domain.center : drift.start;
  if (plan.start.size() != d) throw std::invalid_argument("drift: start has wrong dimension");
  if (drift.direction.size() != 0) {
    if (drift.direction.size() != d || drift.direction.norm() == 0.0) {
      throw std::invalid_argument("drift: direction must be a nonzero vector of dimension d");
    }
    plan.direction = drift.direction.normalized();
  } else {
    plan.direction = Point(d);
    do {
      for (int i = 0; i < d; ++i) plan.direction[i] = normal(rng);
    } while (plan.direction.norm() == 0.0);
    plan.direction.normalize();
  }
  if (drift.kind == DriftKind::random_walk) {
    plan.walk.reserve(static_cast<std::size_t>(std::max(horizon - 1, 0)));
    for (int t = 1; t < horizon; ++t) {
      Point step(d);
      for (int i = 0; i < d; ++i) step[i] = normal(rng);
      plan.walk.push_back(std::move(step));
    }
  }
  return plan;
}

// Position along the interior chord through `start` in `direction`,
// bouncing between the chord ends.
double fold_on_chord(double travelled, double lo, double hi) {
  const double len = hi - lo;
  if (len <= 0.0) return 0.0;
  double y = std::fmod(travelled - lo, 2.0 * len);
  if (y < 0.0) y += 2.0 * len;
  if (y > len) y = 2.0 * len - y;
  return lo + y;
}

std::vector<QuadraticObjective> generate(const BallDomain& domain, const DriftSchedule& drift,
                                         const DriftPlan& plan, int horizon, double scale) {
  std::vector<QuadraticObjective> out;
  out.reserve(static_cast<std::size_t>(horizon));
  const double T = horizon;

  switch (drift.kind) {
    case DriftKind::piecewise_constant: {
      const int k = std::max(drift.change_points, 0);
      int state = 0;
      for (int t = 1; t <= horizon; ++t) {
        while (state < k && t >= 1 + static_cast<int>(std::floor((state + 1) * T / (k + 1)))) ++state;
        const bool moved = (state % 2) == 1;
        QuadraticObjective f;
        f.curvature = drift.curvature;
        f.peak_value = drift.peak_value + (moved ? scale * drift.peak_jump : 0.0);
        f.peak = moved ? Point(plan.start + scale * drift.jump_size * plan.direction) : plan.start;
        out.push_back(std::move(f));
      }
      break;
    }
    case DriftKind::linear_drift: {
      const Point w = plan.start - domain.center;
      const double uw = plan.direction.dot(w);
      const double ell = domain.interior_radius();
      const double disc = uw * uw - w.squaredNorm() + ell * ell;
      if (disc < 0.0) throw std::invalid_argument("drift: start lies outside the interior region");
      const double lo = -uw - std::sqrt(disc);
      const double hi = -uw + std::sqrt(disc);
      for (int t = 1; t <= horizon; ++t) {
        const double pos = fold_on_chord(scale * drift.velocity * (t - 1), lo, hi);
        out.push_back({drift.peak_value, drift.curvature, plan.start + pos * plan.direction});
      }
      break;
    }
    case DriftKind::sinusoidal: {
      if (!(drift.period > 0.0)) throw std::invalid_argument("drift: sinusoidal period must be positive");
      for (int t = 1; t <= horizon; ++t) {
        const double s = std::sin(2.0 * std::numbers::pi * t / drift.period);
        out.push_back({drift.peak_value, drift.curvature, plan.start + scale * drift.amplitude * s * plan.direction});
      }
      break;
    }
    case DriftKind::random_walk: {
      const double per_coord = scale * drift.step_scale / std::sqrt(static_cast<double>(domain.dimension()));
      Point theta = plan.start;
      for (int t = 1; t <= horizon; ++t) {
        out.push_back({drift.peak_value, drift.curvature, theta});
        if (t < horizon) theta = project_interior(domain, theta + per_coord * plan.walk[static_cast<std::size_t>(t - 1)]);
      }
      break;
    }
  }
  return out;
}

ObjectiveSequence assemble(const BallDomain& domain, double noise_amplitude,
                           std::vector<QuadraticObjective> objectives) {
  ObjectiveSequence seq;
  seq.domain = domain;
  seq.noise_amplitude = noise_amplitude;
  seq.objectives = std::move(objectives);
  const auto n = seq.objectives.size();
  seq.step_variation.assign(n > 0 ? n - 1 : 0, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    seq.step_variation[i] = step_variation(seq.objectives[i], seq.objectives[i + 1], domain);
    seq.total_budget += seq.step_variation[i];
  }
  return seq;
}

bool peaks_interior(const BallDomain& domain, const std::vector<QuadraticObjective>& objs) {
  return std::all_of(objs.begin(), objs.end(),
                     [&](const QuadraticObjective& f) { return domain.in_interior(f.peak, 1e-12); });
}

}  // namespace

void validate_sequence(const ObjectiveSequence& seq, const std::optional<Regularity>& regularity) {
  const auto& domain = seq.domain;
  if (seq.noise_amplitude < 0.0) throw std::invalid_argument("sequence: noise amplitude must be >= 0");
  for (std::size_t i = 0; i < seq.objectives.size(); ++i) {
    const auto& f = seq.objectives[i];
    const std::string where = "sequence: objective t=" + std::to_string(i + 1) + ": ";
    if (f.peak.size() != domain.center.size()) throw std::invalid_argument(where + "dimension mismatch");
    if (!(f.curvature > 0.0)) throw std::invalid_argument(where + "curvature must be positive");
    if (!domain.in_interior(f.peak, 1e-12)) throw std::invalid_argument(where + "peak lies outside X°(c0)");
    if (sup_abs_value(f, domain) + seq.noise_amplitude > 1.0 + 1e-12) {
      throw std::invalid_argument(where + "sup|f| + noise exceeds 1");
    }
    if (regularity) {
      if (f.curvature < regularity->strong_concavity - 1e-12 || f.curvature > regularity->smoothness + 1e-12) {
        throw std::invalid_argument(where + "curvature outside [sigma, L]");
      }
      if (sup_gradient_norm(f, domain) > regularity->smoothness + 1e-12) {
        throw std::invalid_argument(where + "gradient norm exceeds L");
      }
    }
  }
}

ObjectiveSequence build_sequence(const BallDomain& domain, const DriftSchedule& drift,
                                 double noise_amplitude, int horizon, std::uint64_t rng_seed,
                                 const std::optional<Regularity>& regularity) {
  domain.validate();
  if (horizon < 1) throw std::invalid_argument("sequence: horizon must be >= 1");
  if (noise_amplitude < 0.0) throw std::invalid_argument("sequence: noise amplitude must be >= 0");
  if (!(drift.curvature > 0.0)) throw std::invalid_argument("sequence: curvature must be positive");

  const DriftPlan plan = plan_drift(domain, drift, horizon, rng_seed);
  if (!domain.in_interior(plan.start)) throw std::invalid_argument("sequence: start lies outside X°(c0)");

  double scale = 1.0;
  if (drift.target_budget) {
    const double target = *drift.target_budget;
    if (target < 0.0) throw std::invalid_argument("sequence: target budget must be >= 0");
    auto budget_at = [&](double s) -> std::optional<double> {
      auto objs = generate(domain, drift, plan, horizon, s);
      if (!peaks_interior(domain, objs)) return std::nullopt;
      return assemble(domain, noise_amplitude, std::move(objs)).total_budget;
    };
    if (target == 0.0) {
      scale = 0.0;
    } else {
      double lo = 0.0;
      double hi = 1.0;
      std::optional<double> v = budget_at(hi);
      int grow = 0;
      while (v && *v < target && grow++ < 80) {
        lo = hi;
        hi *= 2.0;
        v = budget_at(hi);
      }
      if (v && *v < target) throw std::invalid_argument("sequence: target budget unreachable (drift magnitudes are zero?)");
      // Bisect on the largest feasible scale whose budget reaches the target.
      scale = hi;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const auto vm = budget_at(mid);
        if (vm && std::abs(*vm - target) <= 1e-4 * target) {
          scale = mid;
          break;
        }
        if (!vm || *vm > target) {
          hi = mid;
        } else {
          lo = mid;
        }
        scale = mid;
      }
      const auto final_v = budget_at(scale);
      if (!final_v || std::abs(*final_v - target) > 0.01 * target) {
        throw std::invalid_argument("sequence: target budget unreachable within the interior region");
      }
    }
  }

  auto seq = assemble(domain, noise_amplitude, generate(domain, drift, plan, horizon, scale));
  validate_sequence(seq, regularity);
  return seq;
}

FeedbackSample sample_feedback(const QuadraticObjective& obj, const Point& x, double noise_amplitude,
                               Rng& rng) {
  const double mean = obj(x);
  if (noise_amplitude == 0.0) return {mean, mean};
  std::uniform_real_distribution<double> noise(-noise_amplitude, noise_amplitude);
  return {mean + noise(rng), mean};
}

Environment::Environment(const ObjectiveSequence& seq, std::uint64_t noise_seed)
    : seq_(&seq), rng_(noise_seed) {}

FeedbackSample Environment::query(int t, const Point& x) {
  if (x.size() != seq_->domain.center.size()) {
    throw std::invalid_argument("environment: action has dimension " + std::to_string(x.size()) +
                                ", expected " + std::to_string(seq_->domain.center.size()));
  }
  return sample_feedback(seq_->at(t), x, seq_->noise_amplitude, rng_);
}

void write_sequence_csv(std::ostream& out, const ObjectiveSequence& seq) {
  const int d = seq.domain.dimension();
  std::vector<std::string> header{"t", "b", "sigma_f"};
  for (int i = 1; i <= d; ++i) header.push_back("theta_" + std::to_string(i));
  header.push_back("delta_t");
  csv::write_header(out, header);
  std::vector<double> row;
  for (int t = 1; t <= seq.horizon(); ++t) {
    const auto& f = seq.at(t);
    row.assign({static_cast<double>(t), f.peak_value, f.curvature});
    for (int i = 0; i < d; ++i) row.push_back(f.peak[i]);
    row.push_back(t < seq.horizon() ? seq.step_variation[static_cast<std::size_t>(t - 1)] : 0.0);
    csv::write_row(out, row);
  }
}

ObjectiveSequence read_sequence_csv(std::istream& in) {
  const auto table = csv::read(in);
  int d = 0;
  while (table.has_column("theta_" + std::to_string(d + 1))) ++d;
  if (d == 0) throw std::runtime_error("sequence csv: no theta columns");
  const auto cb = table.column("b");
  const auto cs = table.column("sigma_f");
  const auto cd = table.column("delta_t");
  const auto c1 = table.column("theta_1");

  ObjectiveSequence seq;
  seq.domain.center = Point::Zero(d);
  for (const auto& r : table.rows) {
    QuadraticObjective f;
    f.peak_value = r[cb];
    f.curvature = r[cs];
    f.peak = Point(d);
    for (int i = 0; i < d; ++i) f.peak[i] = r[c1 + static_cast<std::size_t>(i)];
    seq.objectives.push_back(std::move(f));
  }
  for (std::size_t i = 0; i + 1 < table.rows.size(); ++i) {
    seq.step_variation.push_back(table.rows[i][cd]);
    seq.total_budget += table.rows[i][cd];
  }
  return seq;
}

}  // namespace nsbo
