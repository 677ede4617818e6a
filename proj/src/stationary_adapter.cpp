#include "nsbo/stationary_adapter.hpp"

#include <cmath>
#include <stdexcept>

namespace nsbo {

double adapter_ucb(std::int64_t t, double reward_sum, double rho_tilde_t, std::int64_t T) {
  if (t < 1 || t > T) throw std::invalid_argument("adapter_ucb: need 1 <= t <= T");
  const double td = static_cast<double>(t);
  return reward_sum / td + rho_tilde_t + std::sqrt(std::log(2.0 * static_cast<double>(T)) / td);
}

void validate_certificate(const std::function<double(double)>& rho_tilde, std::int64_t T) {
  double prev = rho_tilde(1.0);
  if (!(prev >= 0.0)) throw std::invalid_argument("certificate: rho~(1) must be >= 0");
  double prev_c = prev;
  for (std::int64_t t = 2; t <= T; ++t) {
    const double v = rho_tilde(static_cast<double>(t));
    const double c = v * static_cast<double>(t);
    if (v > prev * (1.0 + 1e-12)) {
      throw std::invalid_argument("certificate: rho~ increases at t=" + std::to_string(t));
    }
    if (c < prev_c * (1.0 - 1e-12)) {
      throw std::invalid_argument("certificate: t*rho~(t) decreases at t=" + std::to_string(t));
    }
    prev = v;
    prev_c = c;
  }
}

StationaryAdapter::StationaryAdapter(std::unique_ptr<StationaryPolicy> policy, std::int64_t horizon, bool validate)
    : policy_(std::move(policy)), horizon_(horizon) {
  if (!policy_) throw std::invalid_argument("adapter: null policy");
  if (horizon_ < 1) throw std::invalid_argument("adapter: horizon must be >= 1");
  if (validate) {
    const StationaryPolicy* p = policy_.get();
    validate_certificate([p](double t) { return p->certificate(t); }, horizon_);
  }
}

StationaryAdapter::StationaryAdapter(const StationaryAdapter& other)
    : policy_(other.policy_->clone()),
      horizon_(other.horizon_),
      reward_sum_(other.reward_sum_),
      clock_(other.clock_) {}

double StationaryAdapter::ingest(double y) {
  policy_->ingest(y);
  reward_sum_ += y;
  ++clock_;
  if (clock_ > horizon_) throw std::logic_error("adapter: more feedback than the declared horizon");
  return adapter_ucb(clock_, reward_sum_, policy_->certificate(static_cast<double>(clock_)), horizon_);
}

std::unique_ptr<UcbPolicy> StationaryAdapter::clone() const { return std::make_unique<StationaryAdapter>(*this); }

double StationaryAdapter::converted_rho(double t) const {
  return 2.0 * policy_->certificate(t) + 3.0 * std::sqrt(std::log(2.0 * static_cast<double>(horizon_)) / t);
}

RhoFunction StationaryAdapter::rho_function() const {
  std::shared_ptr<const StationaryPolicy> snapshot = policy_->clone();
  return converted_rho_function([snapshot](double t) { return snapshot->certificate(t); }, horizon_);
}

RhoFunction converted_rho_function(std::function<double(double)> rho_tilde, std::int64_t T) {
  const double log2T = std::log(2.0 * static_cast<double>(T));
  return RhoFunction([rho_tilde = std::move(rho_tilde), log2T](double t) {
    return 2.0 * rho_tilde(t) + 3.0 * std::sqrt(log2T / t);
  }, T);
}

std::unique_ptr<StationaryAdapter> wrap(std::unique_ptr<StationaryPolicy> policy, std::int64_t T) {
  return std::make_unique<StationaryAdapter>(std::move(policy), T, true);
}

FixedPointPolicy::FixedPointPolicy(Point x, std::function<double(double)> certificate)
    : x_(std::move(x)), certificate_(std::move(certificate)) {}

std::unique_ptr<StationaryPolicy> FixedPointPolicy::clone() const {
  return std::make_unique<FixedPointPolicy>(*this);
}

GridUcbPolicy::GridUcbPolicy(const BallDomain& domain, int arm_count, std::int64_t horizon, GridUcbOptions options)
    : dimension_(domain.dimension()), horizon_(horizon), options_(options) {
  if (arm_count < 1) throw std::invalid_argument("grid ucb: arm count must be >= 1");
  if (horizon_ < 1) throw std::invalid_argument("grid ucb: horizon must be >= 1");
  domain.validate();
  const double ell = domain.interior_radius();
  const int d = dimension_;
  const int per_axis =
      d == 1 ? arm_count : std::max(1, static_cast<int>(std::lround(std::pow(arm_count, 1.0 / d))));
  spacing_ = per_axis > 1 ? 2.0 * ell / (per_axis - 1) : 2.0 * ell;

  if (per_axis == 1) {
    arms_.push_back(domain.center);
  } else {
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    while (true) {
      Point x(d);
      for (int i = 0; i < d; ++i) x[i] = domain.center[i] - ell + spacing_ * idx[static_cast<std::size_t>(i)];
      if (domain.in_interior(x, 1e-12)) arms_.push_back(project_interior(domain, x));
      int k = 0;
      while (k < d && ++idx[static_cast<std::size_t>(k)] == per_axis) idx[static_cast<std::size_t>(k++)] = 0;
      if (k == d) break;
    }
  }
  counts_.assign(arms_.size(), 0);
  means_.assign(arms_.size(), 0.0);
  choice_ = choose();
}

std::size_t GridUcbPolicy::choose() const {
  for (std::size_t i = 0; i < arms_.size(); ++i) {
    if (counts_[i] == 0) return i;
  }
  const double log_term = std::log(static_cast<double>(arms_.size()) * static_cast<double>(horizon_));
  std::size_t best = 0;
  double best_index = -1e300;
  for (std::size_t i = 0; i < arms_.size(); ++i) {
    const double index = means_[i] + options_.width * std::sqrt(log_term / static_cast<double>(counts_[i]));
    if (index > best_index) {
      best_index = index;
      best = i;
    }
  }
  return best;
}

Point GridUcbPolicy::next_action() const { return arms_[choice_]; }

void GridUcbPolicy::ingest(double y) {
  auto& n = counts_[choice_];
  ++n;
  means_[choice_] += (y - means_[choice_]) / static_cast<double>(n);
  ++pulls_;
  choice_ = choose();
}

double GridUcbPolicy::certificate(double t) const {
  const double K = static_cast<double>(arms_.size());
  const double bias = options_.lipschitz * spacing_ * std::sqrt(static_cast<double>(dimension_));
  const double explore = arms_.size() > 1 ? std::sqrt(K * std::log(K * static_cast<double>(horizon_)) / t) : 0.0;
  return options_.certificate_constant * (explore + bias);
}

std::unique_ptr<StationaryPolicy> GridUcbPolicy::clone() const { return std::make_unique<GridUcbPolicy>(*this); }

std::unique_ptr<StationaryPolicy> grid_ucb_policy(const BallDomain& domain, int arm_count, std::int64_t T,
                                                  GridUcbOptions options) {
  return std::make_unique<GridUcbPolicy>(domain, arm_count, T, options);
}

}  // namespace nsbo
