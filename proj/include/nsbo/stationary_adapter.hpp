#pragma once

#include "nsbo/environment.hpp"
#include "nsbo/master_scheduler.hpp"
#include "nsbo/policy.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace nsbo {

/// A policy with a declared stationary-regret certificate: with high
/// probability, (1/t) max_x sum_{tau<=t} (f_tau(x) - f_tau(x_tau)) <= certificate(t).
class StationaryPolicy {
 public:
  virtual ~StationaryPolicy() = default;
  virtual Point next_action() const = 0;
  virtual void ingest(double y) = 0;
  /// rho~(t); must be non-increasing with t * rho~(t) non-decreasing.
  virtual double certificate(double t) const = 0;
  virtual std::unique_ptr<StationaryPolicy> clone() const = 0;
};

/// reward_sum / t + rho~(t) + sqrt(ln(2T) / t)
double adapter_ucb(std::int64_t t, double reward_sum, double rho_tilde_t, std::int64_t T);

/// Turns a stationary-regret policy into a UCB policy usable by the
/// multi-scale scheduler, with rho(t) = 2 rho~(t) + 3 sqrt(ln(2T)/t) and lambda = 2.
class StationaryAdapter final : public UcbPolicy {
 public:
  static constexpr double kLambda = 2.0;

  /// Throws std::invalid_argument if the certificate fails its monotonicity checks on 1..T.
  StationaryAdapter(std::unique_ptr<StationaryPolicy> policy, std::int64_t horizon, bool validate = true);
  StationaryAdapter(const StationaryAdapter& other);

  Point next_action() const override { return policy_->next_action(); }
  double ingest(double y) override;
  long clock() const override { return clock_; }
  std::unique_ptr<UcbPolicy> clone() const override;

  double reward_sum() const { return reward_sum_; }
  std::int64_t horizon() const { return horizon_; }
  const StationaryPolicy& policy() const { return *policy_; }

  double converted_rho(double t) const;
  RhoFunction rho_function() const;

 private:
  std::unique_ptr<StationaryPolicy> policy_;
  std::int64_t horizon_;
  double reward_sum_ = 0.0;
  long clock_ = 0;
};

/// Checks rho~ non-increasing and t rho~(t) non-decreasing on t = 1..T.
void validate_certificate(const std::function<double(double)>& rho_tilde, std::int64_t T);

std::unique_ptr<StationaryAdapter> wrap(std::unique_ptr<StationaryPolicy> policy, std::int64_t T);

/// rho(t) = 2 rho~(t) + 3 sqrt(ln(2T)/t) for a certificate rho~.
RhoFunction converted_rho_function(std::function<double(double)> rho_tilde, std::int64_t T);

/// Always plays one fixed point. Mostly useful as an oracle in tests.
class FixedPointPolicy final : public StationaryPolicy {
 public:
  explicit FixedPointPolicy(Point x, std::function<double(double)> certificate = [](double) { return 0.0; });
  Point next_action() const override { return x_; }
  void ingest(double) override {}
  double certificate(double t) const override { return certificate_(t); }
  std::unique_ptr<StationaryPolicy> clone() const override;

 private:
  Point x_;
  std::function<double(double)> certificate_;
};

struct GridUcbOptions {
  /// Bonus is width * sqrt(ln(K T) / n_i).
  double width = 2.0;
  /// c in rho~(t) = c (sqrt(K ln(K T) / t) + L h sqrt(d)).
  double certificate_constant = 2.0;
  /// Lipschitz bound used for the discretization term.
  double lipschitz = 1.0;
};

/// Optimism over a fixed lattice of arms inside X°(c0). In d = 1 there are
/// exactly K evenly spaced arms; for d > 1 the per-axis count is round(K^(1/d))
/// and lattice points outside X°(c0) are dropped.
class GridUcbPolicy final : public StationaryPolicy {
 public:
  GridUcbPolicy(const BallDomain& domain, int arm_count, std::int64_t horizon, GridUcbOptions options = {});

  Point next_action() const override;
  void ingest(double y) override;
  double certificate(double t) const override;
  std::unique_ptr<StationaryPolicy> clone() const override;

  const std::vector<Point>& arms() const { return arms_; }
  double spacing() const { return spacing_; }
  const std::vector<std::int64_t>& counts() const { return counts_; }
  const std::vector<double>& means() const { return means_; }
  std::size_t current_arm() const { return choice_; }

 private:
  std::size_t choose() const;

  std::vector<Point> arms_;
  double spacing_ = 0.0;
  int dimension_ = 1;
  std::int64_t horizon_;
  GridUcbOptions options_;
  std::vector<std::int64_t> counts_;
  std::vector<double> means_;
  std::int64_t pulls_ = 0;
  std::size_t choice_ = 0;
};

std::unique_ptr<StationaryPolicy> grid_ucb_policy(const BallDomain& domain, int arm_count, std::int64_t T,
                                                  GridUcbOptions options = {});

}  // namespace nsbo
