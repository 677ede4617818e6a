#pragma once

#include "nsbo/environment.hpp"
#include "nsbo/master_scheduler.hpp"

#include <vector>

namespace nsbo {

/// sum_t (f_t* - f_t(x_t)). Throws std::invalid_argument on length mismatch.
double dynamic_regret(const std::vector<Point>& actions, const ObjectiveSequence& seq);
double dynamic_regret(const MasterTrace& trace, const ObjectiveSequence& seq);

/// Maximizer over X of sum_{t in [first, last]} f_t (1-based, inclusive).
/// For quadratics this is the curvature-weighted mean of the peaks, projected onto X.
Point best_fixed_point(const ObjectiveSequence& seq, int first, int last);

/// max_x sum_t f_t(x) - sum_t f_t(x_t).
double stationary_regret(const std::vector<Point>& actions, const ObjectiveSequence& seq);
double stationary_regret(const MasterTrace& trace, const ObjectiveSequence& seq);

struct RegretRow {
  int t;
  double instantaneous;       // f_t* - f_t(x_t)
  double cumulative_dynamic;
  double cumulative_stationary;  // against the best fixed point for f_1..f_t
};

std::vector<RegretRow> regret_rows(const std::vector<Point>& actions, const ObjectiveSequence& seq);

struct AuditRow {
  int t;
  bool in_scope;   // Delta_[1,t] <= rho(t) / lambda
  bool property1;  // rbar_t >= min_{tau<=t} f_tau* - lambda Delta_[1,t]
  bool property2;  // (1/t) sum_{tau<=t} (rbar_tau - y_tau) <= rho(t) + lambda Delta_[1,t]
  double rho;
  double variation;  // Delta_[1,t]
  double rbar;
  double min_optimum;
  double mean_gap;
};

struct AuditReport {
  std::vector<AuditRow> rows;
  double lambda = 0.0;
  int in_scope = 0;
  int property1_violations = 0;
  int property2_violations = 0;

  double property1_rate() const { return in_scope ? static_cast<double>(property1_violations) / in_scope : 0.0; }
  double property2_rate() const { return in_scope ? static_cast<double>(property2_violations) / in_scope : 0.0; }
};

/// Checks both weakly-non-stationary properties at every t in scope.
/// Violations are only counted for in-scope t.
AuditReport audit_confidence(const std::vector<double>& y, const std::vector<double>& rbar,
                              const ObjectiveSequence& seq, const RhoFunction& rho, double lambda);
AuditReport audit_confidence(const MasterTrace& trace, const ObjectiveSequence& seq, const RhoFunction& rho,
                              double lambda);

}  // namespace nsbo
