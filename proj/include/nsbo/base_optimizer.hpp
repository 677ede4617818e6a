#pragma once

#include "nsbo/environment.hpp"
#include "nsbo/policy.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace nsbo {

struct BaseParams {
  double step_size = 1.0;        // eta0
  double ucb_constant = 0.0;     // kappa0, already multiplied by kappa_scale
  double theoretical_kappa = 0.0;
  double contraction = 0.5;      // gamma
  double interior_margin = 0.25; // c0
  std::int64_t initial_batch = 1; // N0
  int dimension = 1;
  std::int64_t horizon_hint = 2;
  double kappa_scale = 1.0;

  /// rho(t) = 6 kappa0 / sqrt(t)
  double rho(double t) const;
  /// lambda = 6 kappa0
  double lambda() const { return 6.0 * ucb_constant; }
};

/// Unscaled kappa0 for the given physical constants (the five-term sum).
double theoretical_kappa(double L, double sigma, int d, std::int64_t T, double diameter, double c0);

/// Derives eta0 = 1/L, gamma = sigma/L, N0 = max(ceil(c0^-2) + 1, ceil(c0^-4))
/// and kappa0 = kappa_scale * theoretical_kappa(...).
/// Throws std::invalid_argument on out-of-range inputs (including sigma >= L).
BaseParams derive_params(double L, double sigma, int d, std::int64_t T, double diameter, double c0,
                         double kappa_scale = 1.0);

struct EpochSize {
  std::int64_t batch;  // n_s
  double radius;       // delta_s = n_s^(-1/4)
};

/// Batches larger than this saturate; a thread can never consume them anyway.
inline constexpr std::int64_t kMaxBatch = std::int64_t{1} << 52;

/// n_s = ceil((1 - gamma)^(-4 s) N0), delta_s = n_s^(-1/4).
EpochSize epoch_schedule(int s, std::int64_t N0, double gamma);

/// (u+ - u-) / (2 delta n)
double finalize_gradient(double u_plus, double u_minus, double delta, std::int64_t n);

/// Snapshot of one completed epoch, kept for diagnostics and audits.
struct EpochRecord {
  int epoch;
  Point iterate;   // z_s
  Point gradient;  // g_hat_s
  std::int64_t batch;
  double radius;
  long first_step;  // internal clock value of the epoch's first feedback
};

/// Epoch-batched two-point gradient ascent with a fixed step size.
/// Each epoch s probes z_s ± delta_s e_j, alternating +,-, for 2 n_s steps per
/// coordinate, then moves z_{s+1} = P_{X°(c0)}(z_s + eta0 g_hat_s).
/// The object is a pure state machine over its own clock, so it can be
/// paused and resumed at any step.
class BaseOptimizer final : public UcbPolicy {
 public:
  BaseOptimizer(BaseParams params, BallDomain domain);
  BaseOptimizer(BaseParams params, BallDomain domain, Point initial_iterate);

  Point next_action() const override;
  double ingest(double y) override;
  long clock() const override { return clock_; }
  std::unique_ptr<UcbPolicy> clone() const override;

  /// Applies z <- P(z + eta0 g_hat), moves to the next epoch and returns the new iterate.
  const Point& advance_epoch(const Point& g_hat);

  const BaseParams& params() const { return params_; }
  const Point& iterate() const { return iterate_; }
  int epoch() const { return epoch_; }
  int coordinate() const { return coordinate_; }
  std::int64_t batch() const { return size_.batch; }
  double probe_radius() const { return size_.radius; }
  double plus_accumulator() const { return u_plus_; }
  double minus_accumulator() const { return u_minus_; }
  /// Steps taken on the current coordinate; even means the next probe is "+".
  std::int64_t pair_step() const { return pair_step_; }
  double cumulative_reward() const { return reward_; }
  double last_ucb() const { return last_ucb_; }
  const Point& partial_gradient() const { return gradient_; }
  const std::vector<EpochRecord>& history() const { return history_; }

  /// Full-state equality (used for pause/resume checks).
  bool same_state(const BaseOptimizer& other) const;

 private:
  void start_epoch();

  BaseParams params_;
  BallDomain domain_;
  Point iterate_;
  int epoch_ = 0;
  int coordinate_ = 0;  // 0-based j
  EpochSize size_{1, 1.0};
  std::int64_t pair_step_ = 0;
  double u_plus_ = 0.0;
  double u_minus_ = 0.0;
  Point gradient_;
  double reward_ = 0.0;
  long clock_ = 0;
  double last_ucb_ = 0.0;
  long epoch_first_step_ = 1;
  std::vector<EpochRecord> history_;
  mutable bool action_issued_ = false;
};

}  // namespace nsbo
