#pragma once

#include "nsbo/environment.hpp"
#include "nsbo/policy.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace nsbo {

/// Confidence radius rho(t) over a horizon T. Must be non-increasing with
/// t * rho(t) non-decreasing on t = 1..T.
class RhoFunction {
 public:
  RhoFunction(std::function<double(double)> fn, std::int64_t horizon);

  /// rho(t) = scale / sqrt(t)
  static RhoFunction inverse_sqrt(double scale, std::int64_t horizon);

  double operator()(double t) const { return fn_(t); }
  std::int64_t horizon() const { return horizon_; }

  /// Throws std::invalid_argument if either monotonicity condition fails on 1..T.
  void validate() const;

 private:
  std::function<double(double)> fn_;
  std::int64_t horizon_;
};

/// 6 (log2 T + 1) rho(t)
double rho_hat(const RhoFunction& rho, double t);

/// Smallest n with 2^n >= T.
int block_order_cap(std::int64_t T);

enum class ThreadStatus { scheduled, running, finished, killed };

struct ThreadRecord {
  int order = 0;
  std::int64_t start = 0;
  std::int64_t end = 0;  // start + 2^order, exclusive
  ThreadStatus status = ThreadStatus::scheduled;
  std::unique_ptr<UcbPolicy> state;  // created at first activation
  std::int64_t steps_run = 0;
  std::size_t slot = 0;  // insertion index within its block

  bool covers(std::int64_t t) const { return start <= t && t < end; }
};

/// For m = n..0 and each aligned start t_n + z 2^m, includes an order-m thread
/// with probability rho(2^n) / rho(2^m). The order-n thread is always present.
std::vector<ThreadRecord> schedule_block(int n, std::int64_t t_n, const RhoFunction& rho, Rng& rng);

/// Lowest-order non-killed thread covering t; ties go to the earliest start,
/// then the earliest insertion. Returns nullopt when nothing covers t.
std::optional<std::size_t> active_thread(const std::vector<ThreadRecord>& schedule, std::int64_t t);

/// Fails (returns true) iff window_reward_sum / 2^m >= U + 9 rho_hat(2^m).
bool test1(const ThreadRecord& thread, double window_reward_sum, double running_min, const RhoFunction& rho);

/// Feedback and UCB values of the current block, starting at t_n.
class BlockHistory {
 public:
  explicit BlockHistory(std::int64_t block_start = 1) : start_(block_start) {}

  void record(double y, double rbar);

  std::int64_t start() const { return start_; }
  /// Global time of the latest record (start - 1 when empty).
  std::int64_t last() const { return start_ + static_cast<std::int64_t>(y_.size()) - 1; }
  bool empty() const { return y_.empty(); }
  double running_min() const { return running_min_; }
  /// sum_{tau = t_n}^{t} (rbar_tau - y_tau) through the latest record.
  double gap_sum() const { return gap_sum_; }
  /// Sum of y over global times [from, to).
  double feedback_sum(std::int64_t from, std::int64_t to) const;

 private:
  std::int64_t start_;
  std::vector<double> y_;
  std::vector<double> prefix_;  // prefix_[i] = y_0 + ... + y_{i-1}
  double gap_sum_ = 0.0;
  double running_min_ = 0.0;
};

/// Fails iff the average of (rbar - y) over [t_n, t] reaches 3 rho_hat(t - t_n + 1).
bool test2(const BlockHistory& history, std::int64_t t, std::int64_t t_n, const RhoFunction& rho);

struct MasterStep {
  std::int64_t t;
  int block_order;
  int thread_order;
  Point action;
  double y;
  double rbar;
  double running_min;
  bool restart;
  int test_fired;  // 0 none, 1 or 2
};

struct RestartEvent {
  std::int64_t t;
  int test;
  int thread_order;
  int block_order;
  std::int64_t block_start;
};

struct MasterTrace {
  int dimension = 0;
  std::vector<MasterStep> steps;
  std::vector<RestartEvent> restarts;
};

/// Produces the thread set of block (n, t_n).
using BlockScheduler = std::function<std::vector<ThreadRecord>(int n, std::int64_t t_n)>;

/// Multi-scale sampling over copies of a UCB policy: doubling blocks,
/// lowest-order thread runs, two restart tests with the inflated radius.
class MasterScheduler {
 public:
  MasterScheduler(RhoFunction rho, PolicyFactory factory, std::uint64_t seed);
  /// Uses `scheduler` instead of random draws (for replaying handcrafted schedules).
  MasterScheduler(RhoFunction rho, PolicyFactory factory, BlockScheduler scheduler);

  MasterScheduler(const MasterScheduler&) = delete;
  MasterScheduler& operator=(const MasterScheduler&) = delete;

  /// Runs global step t = time() + 1.
  const MasterStep& step(Environment& env);

  /// Runs until time() == T and returns the trace.
  MasterTrace run(std::int64_t T, Environment& env);

  std::int64_t time() const { return t_; }
  const MasterTrace& trace() const { return trace_; }
  int block_order() const { return n_; }
  std::int64_t block_start() const { return block_.start(); }
  const std::vector<ThreadRecord>& threads() const { return threads_; }
  const BlockHistory& block() const { return block_; }
  const RhoFunction& rho() const { return rho_; }

 private:
  void begin_block(int n, std::int64_t t_n);
  std::size_t lookup_active(std::int64_t t) const;

  RhoFunction rho_;
  PolicyFactory factory_;
  Rng rng_;
  BlockScheduler scheduler_;
  int cap_;

  std::int64_t t_ = 0;
  int n_ = 0;
  BlockHistory block_;
  std::vector<ThreadRecord> threads_;
  // slots_[m][z] = index into threads_ of the order-m thread starting at t_n + z 2^m, or -1.
  std::vector<std::vector<std::int64_t>> slots_;
  MasterTrace trace_;
  bool started_ = false;
};

/// Convenience wrapper: seeds the scheduler from `seed` and runs T steps.
MasterTrace run_master(std::int64_t T, const RhoFunction& rho, const PolicyFactory& factory, Environment& env,
                       std::uint64_t seed);

}  // namespace nsbo
