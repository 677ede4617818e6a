#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace nsbo {

using Point = Eigen::VectorXd;
using Rng = std::mt19937_64;

/// Euclidean ball X = B(center, radius) with the shrunken interior
/// X°(c0) = B(center, radius - interior_margin) used as the projection target.
struct BallDomain {
  Point center;
  double radius = 1.0;
  double interior_margin = 0.25;

  BallDomain() = default;
  BallDomain(Point c, double r, double c0);

  int dimension() const { return static_cast<int>(center.size()); }
  double diameter() const { return 2.0 * radius; }
  double interior_radius() const { return radius - interior_margin; }

  bool contains(const Point& x, double tol = 1e-12) const;
  bool in_interior(const Point& x, double tol = 1e-12) const;

  /// Throws std::invalid_argument unless d >= 1, 0 < c0 < 1 and radius > c0.
  void validate() const;
};

/// f(x) = peak_value - (curvature / 2) * ||x - peak||^2
struct QuadraticObjective {
  double peak_value = 0.0;
  double curvature = 1.0;
  Point peak;

  double operator()(const Point& x) const;
  Point gradient(const Point& x) const;
};

double evaluate(const QuadraticObjective& obj, const Point& x);

struct Optimum {
  Point point;
  double value;
};
Optimum optimum(const QuadraticObjective& obj);

/// Largest |f(x)| over the ball.
double sup_abs_value(const QuadraticObjective& obj, const BallDomain& domain);

/// Largest ||grad f(x)|| over the ball.
double sup_gradient_norm(const QuadraticObjective& obj, const BallDomain& domain);

/// Exact sup over the domain of |b(x) - a(x)|. Equal curvatures make the
/// difference affine; otherwise it is radial about a point on the line
/// through both peaks and the extremes sit at the nearest/farthest distances.
double step_variation(const QuadraticObjective& a, const QuadraticObjective& b,
                      const BallDomain& domain);

/// Euclidean projection onto X°(c0).
Point project_interior(const BallDomain& domain, const Point& z);

/// Euclidean projection onto X itself.
Point project_domain(const BallDomain& domain, const Point& z);

enum class DriftKind { piecewise_constant, linear_drift, sinusoidal, random_walk };

std::string to_string(DriftKind kind);
DriftKind drift_kind_from_string(const std::string& name);

struct DriftSchedule {
  DriftKind kind = DriftKind::piecewise_constant;

  double curvature = 1.0;
  double peak_value = 0.5;
  /// Initial peak location; empty means the domain center.
  Point start;
  /// Unit direction of motion; empty means drawn from `seed`.
  Point direction;

  // piecewise_constant: `change_points` jumps evenly spaced in time; the peak
  // alternates between `start` and `start + jump_size * direction` and the
  // peak value alternates between `peak_value` and `peak_value + peak_jump`.
  int change_points = 0;
  double jump_size = 0.0;
  double peak_jump = 0.0;

  // linear_drift: the peak moves `velocity` per step along `direction`,
  // bouncing between the two ends of the interior chord through `start`.
  double velocity = 0.0;

  // sinusoidal: start + amplitude * sin(2 pi t / period) * direction.
  double amplitude = 0.0;
  double period = 100.0;

  // random_walk: projected Gaussian steps with per-coordinate scale
  // step_scale / sqrt(d).
  double step_scale = 0.0;

  /// When set, drift magnitudes are rescaled so total_budget lands within 1%.
  std::optional<double> target_budget;

  std::uint64_t seed = 0;
};

/// Optional regularity constants the generated objectives must respect.
struct Regularity {
  double strong_concavity = 0.0;  // sigma
  double smoothness = 0.0;        // L
};

struct ObjectiveSequence {
  BallDomain domain;
  double noise_amplitude = 0.0;
  std::vector<QuadraticObjective> objectives;
  /// step_variation[i] = sup |f_{i+2} - f_{i+1}| (0-based storage of Delta(1..T-1)).
  std::vector<double> step_variation;
  double total_budget = 0.0;

  int horizon() const { return static_cast<int>(objectives.size()); }
  /// f_t for 1-based t.
  const QuadraticObjective& at(int t) const { return objectives.at(static_cast<std::size_t>(t - 1)); }
  /// Delta_{[1,t]} = sum_{tau < t} Delta(tau), 1-based t.
  std::vector<double> cumulative_variation() const;
};

/// Builds f_1..f_T with exact per-step variation. Deterministic in
/// (drift.seed, rng_seed). Throws std::invalid_argument on any
/// boundedness, regularity or interior-maximizer violation.
ObjectiveSequence build_sequence(const BallDomain& domain, const DriftSchedule& drift,
                                 double noise_amplitude, int horizon, std::uint64_t rng_seed,
                                 const std::optional<Regularity>& regularity = std::nullopt);

/// Checks every objective against the boundedness and regularity invariants.
void validate_sequence(const ObjectiveSequence& seq,
                       const std::optional<Regularity>& regularity = std::nullopt);

struct FeedbackSample {
  double value;
  double mean;
};

/// y = f(x) + xi with xi ~ Uniform[-noise, noise].
FeedbackSample sample_feedback(const QuadraticObjective& obj, const Point& x, double noise_amplitude,
                               Rng& rng);

/// A sequence plus its own noise stream; what an algorithm interacts with.
class Environment {
 public:
  Environment(const ObjectiveSequence& seq, std::uint64_t noise_seed);

  FeedbackSample query(int t, const Point& x);
  const ObjectiveSequence& sequence() const { return *seq_; }
  int dimension() const { return seq_->domain.dimension(); }

 private:
  const ObjectiveSequence* seq_;
  Rng rng_;
};

/// CSV columns: t, b, sigma_f, theta_1..theta_d, delta_t (delta_t of the last row is 0).
void write_sequence_csv(std::ostream& out, const ObjectiveSequence& seq);

/// Reads back what write_sequence_csv produced. Domain and noise are not
/// stored in the CSV and are left default.
ObjectiveSequence read_sequence_csv(std::istream& in);

}  // namespace nsbo
