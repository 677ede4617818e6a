#pragma once

#include "nsbo/environment.hpp"

#include <functional>
#include <memory>

namespace nsbo {

/// A bandit policy that emits an optimistic statistic r̄_t after each
/// feedback. Both the gradient-based optimizer and the stationary-regret
/// adapter implement this; the multi-scale scheduler drives it.
class UcbPolicy {
 public:
  virtual ~UcbPolicy() = default;

  /// The action for the next step. Must not change observable state.
  virtual Point next_action() const = 0;

  /// Consumes the feedback for the last issued action and returns r̄_t.
  virtual double ingest(double y) = 0;

  /// Number of feedbacks ingested so far.
  virtual long clock() const = 0;

  virtual std::unique_ptr<UcbPolicy> clone() const = 0;
};

using PolicyFactory = std::function<std::unique_ptr<UcbPolicy>()>;

}  // namespace nsbo
