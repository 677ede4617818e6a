#include "nsbo/master_scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nsbo {

RhoFunction::RhoFunction(std::function<double(double)> fn, std::int64_t horizon)
    : fn_(std::move(fn)), horizon_(horizon) {
  if (!fn_) throw std::invalid_argument("rho: empty function");
  if (horizon_ < 1) throw std::invalid_argument("rho: horizon must be >= 1");
}

RhoFunction RhoFunction::inverse_sqrt(double scale, std::int64_t horizon) {
  if (!(scale >= 0.0)) throw std::invalid_argument("rho: scale must be >= 0");
  return RhoFunction([scale](double t) { return scale / std::sqrt(t); }, horizon);
}

void RhoFunction::validate() const {
  double prev = fn_(1.0);
  double prev_c = prev;
  for (std::int64_t t = 2; t <= horizon_; ++t) {
    const double v = fn_(static_cast<double>(t));
    const double c = v * static_cast<double>(t);
    if (v > prev * (1.0 + 1e-12) + 1e-300) {
      throw std::invalid_argument("rho: not non-increasing at t=" + std::to_string(t));
    }
    if (c < prev_c * (1.0 - 1e-12)) {
      throw std::invalid_argument("rho: t*rho(t) not non-decreasing at t=" + std::to_string(t));
    }
    prev = v;
    prev_c = c;
  }
}

double rho_hat(const RhoFunction& rho, double t) {
  return 6.0 * (std::log2(static_cast<double>(rho.horizon())) + 1.0) * rho(t);
}

int block_order_cap(std::int64_t T) {
  int n = 0;
  while ((std::int64_t{1} << n) < T) ++n;
  return n;
}

std::vector<ThreadRecord> schedule_block(int n, std::int64_t t_n, const RhoFunction& rho, Rng& rng) {
  if (n < 0 || n > 62) throw std::invalid_argument("schedule_block: block order out of range");
  std::vector<ThreadRecord> out;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double top = rho(std::ldexp(1.0, n));
  for (int m = n; m >= 0; --m) {
    const double p = (m == n) ? 1.0 : top / rho(std::ldexp(1.0, m));
    const std::int64_t len = std::int64_t{1} << m;
    const std::int64_t count = std::int64_t{1} << (n - m);
    for (std::int64_t z = 0; z < count; ++z) {
      if (m != n && !(unif(rng) < p)) continue;
      ThreadRecord th;
      th.order = m;
      th.start = t_n + z * len;
      th.end = th.start + len;
      th.slot = out.size();
      out.push_back(std::move(th));
    }
  }
  return out;
}

std::optional<std::size_t> active_thread(const std::vector<ThreadRecord>& schedule, std::int64_t t) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const auto& th = schedule[i];
    if (th.status == ThreadStatus::killed || !th.covers(t)) continue;
    if (!best) {
      best = i;
      continue;
    }
    const auto& b = schedule[*best];
    if (th.order < b.order || (th.order == b.order && th.start < b.start)) best = i;
  }
  return best;
}

bool test1(const ThreadRecord& thread, double window_reward_sum, double running_min, const RhoFunction& rho) {
  const double len = std::ldexp(1.0, thread.order);
  return window_reward_sum / len >= running_min + 9.0 * rho_hat(rho, len);
}

void BlockHistory::record(double y, double rbar) {
  if (y_.empty()) {
    running_min_ = rbar;
    prefix_.push_back(0.0);
  } else {
    running_min_ = std::min(running_min_, rbar);
  }
  y_.push_back(y);
  prefix_.push_back(prefix_.back() + y);
  gap_sum_ += rbar - y;
}

double BlockHistory::feedback_sum(std::int64_t from, std::int64_t to) const {
  const auto lo = std::clamp<std::int64_t>(from - start_, 0, static_cast<std::int64_t>(y_.size()));
  const auto hi = std::clamp<std::int64_t>(to - start_, lo, static_cast<std::int64_t>(y_.size()));
  if (prefix_.empty()) return 0.0;
  return prefix_[static_cast<std::size_t>(hi)] - prefix_[static_cast<std::size_t>(lo)];
}

bool test2(const BlockHistory& history, std::int64_t t, std::int64_t t_n, const RhoFunction& rho) {
  if (t < t_n) throw std::invalid_argument("test2: t precedes the block start");
  const double len = static_cast<double>(t - t_n + 1);
  return history.gap_sum() / len >= 3.0 * rho_hat(rho, len);
}

MasterScheduler::MasterScheduler(RhoFunction rho, PolicyFactory factory, std::uint64_t seed)
    : rho_(std::move(rho)), factory_(std::move(factory)), rng_(seed), cap_(block_order_cap(rho_.horizon())) {
  scheduler_ = [this](int n, std::int64_t t_n) { return schedule_block(n, t_n, rho_, rng_); };
}

MasterScheduler::MasterScheduler(RhoFunction rho, PolicyFactory factory, BlockScheduler scheduler)
    : rho_(std::move(rho)),
      factory_(std::move(factory)),
      rng_(0),
      scheduler_(std::move(scheduler)),
      cap_(block_order_cap(rho_.horizon())) {}

void MasterScheduler::begin_block(int n, std::int64_t t_n) {
  n_ = n;
  block_ = BlockHistory(t_n);
  threads_ = scheduler_(n, t_n);
  slots_.assign(static_cast<std::size_t>(n + 1), {});
  for (int m = 0; m <= n; ++m) slots_[static_cast<std::size_t>(m)].assign(std::size_t{1} << (n - m), -1);
  for (std::size_t i = 0; i < threads_.size(); ++i) {
    auto& th = threads_[i];
    th.slot = i;
    const std::int64_t len = std::int64_t{1} << th.order;
    if (th.order < 0 || th.order > n || th.end - th.start != len || (th.start - t_n) % len != 0 ||
        th.start < t_n || th.end > t_n + (std::int64_t{1} << n)) {
      throw std::invalid_argument("master: scheduled thread is not an aligned sub-interval of the block");
    }
    auto& cell = slots_[static_cast<std::size_t>(th.order)][static_cast<std::size_t>((th.start - t_n) / len)];
    if (cell != -1) throw std::invalid_argument("master: two threads share one slot");
    cell = static_cast<std::int64_t>(i);
  }
  const auto& top = slots_[static_cast<std::size_t>(n)];
  if (top.empty() || top[0] == -1) throw std::invalid_argument("master: block is missing its order-n thread");
}

std::size_t MasterScheduler::lookup_active(std::int64_t t) const {
  const std::int64_t off = t - block_.start();
  for (int m = 0; m <= n_; ++m) {
    const auto idx = slots_[static_cast<std::size_t>(m)][static_cast<std::size_t>(off >> m)];
    if (idx >= 0 && threads_[static_cast<std::size_t>(idx)].status != ThreadStatus::killed) {
      return static_cast<std::size_t>(idx);
    }
  }
  throw std::logic_error("master: no scheduled thread covers t");
}

const MasterStep& MasterScheduler::step(Environment& env) {
  const std::int64_t t = t_ + 1;
  if (!started_) {
    trace_.dimension = env.dimension();
    begin_block(0, t);
    started_ = true;
  } else {
    const auto& last = trace_.steps.back();
    if (last.restart) {
      begin_block(0, t);
    } else if (t == block_.start() + (std::int64_t{1} << n_)) {
      begin_block(std::min(n_ + 1, cap_), t);
    }
  }

  auto& th = threads_[lookup_active(t)];
  if (!th.state) th.state = factory_();
  th.status = ThreadStatus::running;
  const Point x = th.state->next_action();
  const double y = env.query(static_cast<int>(t), x).value;
  const double rbar = th.state->ingest(y);
  ++th.steps_run;
  block_.record(y, rbar);
  t_ = t;

  MasterStep rec{t, n_, th.order, x, y, rbar, block_.running_min(), false, 0};

  // Test 1 for every thread whose window closes at t + 1.
  const std::int64_t elapsed = t + 1 - block_.start();
  for (int m = 0; m <= n_ && rec.test_fired == 0; ++m) {
    const std::int64_t len = std::int64_t{1} << m;
    if (elapsed % len != 0) continue;
    const auto idx = slots_[static_cast<std::size_t>(m)][static_cast<std::size_t>(elapsed / len - 1)];
    if (idx < 0) continue;
    auto& ending = threads_[static_cast<std::size_t>(idx)];
    ending.status = ThreadStatus::finished;
    if (ending.steps_run == 0) continue;
    const double window = block_.feedback_sum(ending.start, ending.end);
    if (test1(ending, window, block_.running_min(), rho_)) {
      rec.test_fired = 1;
      trace_.restarts.push_back({t, 1, m, n_, block_.start()});
    }
  }
  if (rec.test_fired == 0 && test2(block_, t, block_.start(), rho_)) {
    rec.test_fired = 2;
    trace_.restarts.push_back({t, 2, th.order, n_, block_.start()});
  }
  if (rec.test_fired != 0) {
    rec.restart = true;
    for (auto& other : threads_) other.status = ThreadStatus::killed;
  }
  trace_.steps.push_back(std::move(rec));
  return trace_.steps.back();
}

MasterTrace MasterScheduler::run(std::int64_t T, Environment& env) {
  trace_.steps.reserve(static_cast<std::size_t>(std::max<std::int64_t>(T, 0)));
  while (t_ < T) step(env);
  return trace_;
}

MasterTrace run_master(std::int64_t T, const RhoFunction& rho, const PolicyFactory& factory, Environment& env,
                       std::uint64_t seed) {
  MasterScheduler master(rho, factory, seed);
  return master.run(T, env);
}

}  // namespace nsbo
