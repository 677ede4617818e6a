#include "nsbo/base_optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace nsbo {

double BaseParams::rho(double t) const { return 6.0 * ucb_constant / std::sqrt(t); }

double theoretical_kappa(double L, double sigma, int d, std::int64_t T, double diameter, double c0) {
  const double gamma = sigma / L;
  const double dd = d;
  const double log_dT = std::log(dd * static_cast<double>(T));
  const double log4 = std::pow(log_dT, 4);
  const double d32 = std::pow(dd, 1.5);
  return std::sqrt(log_dT) + L + 2.0 * dd * std::log(static_cast<double>(T)) / (1.0 - gamma) +
         16.0 * diameter * diameter * d32 * log4 / (c0 * std::pow(1.0 - gamma, 3)) +
         2.0 * L * L * d32 * log4 / (c0 * std::pow(1.0 - gamma, 7));
}

BaseParams derive_params(double L, double sigma, int d, std::int64_t T, double diameter, double c0,
                         double kappa_scale) {
  if (!(sigma > 0.0)) throw std::invalid_argument("derive_params: sigma must be positive");
  if (!(sigma < L)) throw std::invalid_argument("derive_params: need sigma < L so that gamma < 1");
  if (d < 1) throw std::invalid_argument("derive_params: dimension must be >= 1");
  if (T < 2) throw std::invalid_argument("derive_params: horizon must be >= 2");
  if (!(diameter > 0.0)) throw std::invalid_argument("derive_params: diameter must be positive");
  if (!(c0 > 0.0 && c0 < 1.0)) throw std::invalid_argument("derive_params: c0 must lie in (0, 1)");
  if (!(kappa_scale >= 0.0)) throw std::invalid_argument("derive_params: kappa_scale must be >= 0");

  BaseParams p;
  p.step_size = 1.0 / L;
  p.contraction = sigma / L;
  p.interior_margin = c0;
  const auto floor_base = static_cast<std::int64_t>(std::ceil(std::pow(c0, -2))) + 1;
  const auto floor_feasible = static_cast<std::int64_t>(std::ceil(std::pow(c0, -4)));
  p.initial_batch = std::max(floor_base, floor_feasible);
  p.dimension = d;
  p.horizon_hint = T;
  p.kappa_scale = kappa_scale;
  p.theoretical_kappa = theoretical_kappa(L, sigma, d, T, diameter, c0);
  p.ucb_constant = kappa_scale * p.theoretical_kappa;
  return p;
}

EpochSize epoch_schedule(int s, std::int64_t N0, double gamma) {
  if (s < 0) throw std::invalid_argument("epoch_schedule: epoch index must be >= 0");
  if (N0 < 1) throw std::invalid_argument("epoch_schedule: N0 must be >= 1");
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("epoch_schedule: gamma must lie in (0, 1)");
  const double v = std::pow(1.0 - gamma, -4.0 * s) * static_cast<double>(N0);
  std::int64_t n;
  if (!(v < static_cast<double>(kMaxBatch))) {
    n = kMaxBatch;
  } else {
    // Values that are integers up to rounding error must not be bumped by ceil.
    const double r = std::round(v);
    n = static_cast<std::int64_t>(std::abs(v - r) <= 1e-9 * v ? r : std::ceil(v));
  }
  return {n, std::pow(static_cast<double>(n), -0.25)};
}

double finalize_gradient(double u_plus, double u_minus, double delta, std::int64_t n) {
  return (u_plus - u_minus) / (2.0 * delta * static_cast<double>(n));
}

BaseOptimizer::BaseOptimizer(BaseParams params, BallDomain domain)
    : BaseOptimizer(params, domain, domain.center) {}

BaseOptimizer::BaseOptimizer(BaseParams params, BallDomain domain, Point initial_iterate)
    : params_(params), domain_(std::move(domain)), iterate_(std::move(initial_iterate)) {
  if (domain_.dimension() != params_.dimension || iterate_.size() != params_.dimension) {
    throw std::invalid_argument("base optimizer: dimension mismatch");
  }
  if (!domain_.in_interior(iterate_)) {
    throw std::invalid_argument("base optimizer: initial iterate must lie in X°(c0)");
  }
  gradient_ = Point::Zero(params_.dimension);
  start_epoch();
}

void BaseOptimizer::start_epoch() {
  size_ = epoch_schedule(epoch_, params_.initial_batch, params_.contraction);
  coordinate_ = 0;
  pair_step_ = 0;
  u_plus_ = 0.0;
  u_minus_ = 0.0;
  gradient_.setZero();
  epoch_first_step_ = clock_ + 1;
}

Point BaseOptimizer::next_action() const {
  Point x = iterate_;
  x[coordinate_] += (pair_step_ % 2 == 0) ? size_.radius : -size_.radius;
  action_issued_ = true;
  return x;
}

double BaseOptimizer::ingest(double y) {
  if (!action_issued_) throw std::logic_error("base optimizer: ingest without a preceding next_action");
  action_issued_ = false;

  if (pair_step_ % 2 == 0) {
    u_plus_ += y;
  } else {
    u_minus_ += y;
  }
  reward_ += y;
  ++clock_;
  ++pair_step_;
  const double t = static_cast<double>(clock_);
  last_ucb_ = reward_ / t + 2.0 * params_.ucb_constant / std::sqrt(t);

  if (pair_step_ == 2 * size_.batch) {
    gradient_[coordinate_] = finalize_gradient(u_plus_, u_minus_, size_.radius, size_.batch);
    u_plus_ = 0.0;
    u_minus_ = 0.0;
    pair_step_ = 0;
    if (++coordinate_ == params_.dimension) {
      const Point g = gradient_;
      advance_epoch(g);
    }
  }
  return last_ucb_;
}

const Point& BaseOptimizer::advance_epoch(const Point& g_hat) {
  if (g_hat.size() != params_.dimension) throw std::invalid_argument("advance_epoch: gradient dimension mismatch");
  history_.push_back({epoch_, iterate_, g_hat, size_.batch, size_.radius, epoch_first_step_});
  iterate_ = project_interior(domain_, iterate_ + params_.step_size * g_hat);
  ++epoch_;
  start_epoch();
  return iterate_;
}

std::unique_ptr<UcbPolicy> BaseOptimizer::clone() const { return std::make_unique<BaseOptimizer>(*this); }

bool BaseOptimizer::same_state(const BaseOptimizer& o) const {
  if (history_.size() != o.history_.size()) return false;
  for (std::size_t i = 0; i < history_.size(); ++i) {
    const auto& a = history_[i];
    const auto& b = o.history_[i];
    if (a.epoch != b.epoch || a.iterate != b.iterate || a.gradient != b.gradient || a.batch != b.batch ||
        a.radius != b.radius || a.first_step != b.first_step) {
      return false;
    }
  }
  return iterate_ == o.iterate_ && epoch_ == o.epoch_ && coordinate_ == o.coordinate_ &&
         size_.batch == o.size_.batch && size_.radius == o.size_.radius && pair_step_ == o.pair_step_ &&
         u_plus_ == o.u_plus_ && u_minus_ == o.u_minus_ && gradient_ == o.gradient_ && reward_ == o.reward_ &&
         clock_ == o.clock_ && last_ucb_ == o.last_ucb_;
}

}  // namespace nsbo
