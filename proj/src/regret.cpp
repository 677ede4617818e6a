#include "nsbo/regret.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace nsbo {

namespace {

std::vector<Point> actions_of(const MasterTrace& trace) {
  std::vector<Point> out;
  out.reserve(trace.steps.size());
  for (const auto& s : trace.steps) out.push_back(s.action);
  return out;
}

void check_length(std::size_t n, const ObjectiveSequence& seq) {
  if (n != static_cast<std::size_t>(seq.horizon())) {
    throw std::invalid_argument("regret: trace has " + std::to_string(n) + " steps but the sequence has " +
                                std::to_string(seq.horizon()));
  }
}

// Running sums that give max_x sum f_t(x) in closed form.
struct QuadraticSum {
  double weight = 0.0;     // sum sigma
  Point moment;            // sum sigma theta
  double spread = 0.0;     // sum sigma ||theta||^2
  double peaks = 0.0;      // sum b

  void add(const QuadraticObjective& f) {
    if (moment.size() == 0) moment = Point::Zero(f.peak.size());
    weight += f.curvature;
    moment += f.curvature * f.peak;
    spread += f.curvature * f.peak.squaredNorm();
    peaks += f.peak_value;
  }
  Point maximizer(const BallDomain& domain) const { return project_domain(domain, moment / weight); }
  double value_at(const Point& x) const {
    return peaks - 0.5 * (weight * x.squaredNorm() - 2.0 * x.dot(moment) + spread);
  }
};

}  // namespace

double dynamic_regret(const std::vector<Point>& actions, const ObjectiveSequence& seq) {
  check_length(actions.size(), seq);
  double total = 0.0;
  for (int t = 1; t <= seq.horizon(); ++t) {
    const auto& f = seq.at(t);
    total += optimum(f).value - f(actions[static_cast<std::size_t>(t - 1)]);
  }
  return total;
}

double dynamic_regret(const MasterTrace& trace, const ObjectiveSequence& seq) {
  return dynamic_regret(actions_of(trace), seq);
}

Point best_fixed_point(const ObjectiveSequence& seq, int first, int last) {
  if (first < 1 || last > seq.horizon() || first > last) throw std::invalid_argument("best_fixed_point: bad range");
  QuadraticSum sum;
  for (int t = first; t <= last; ++t) sum.add(seq.at(t));
  return sum.maximizer(seq.domain);
}

double stationary_regret(const std::vector<Point>& actions, const ObjectiveSequence& seq) {
  check_length(actions.size(), seq);
  if (actions.empty()) return 0.0;
  QuadraticSum sum;
  double collected = 0.0;
  for (int t = 1; t <= seq.horizon(); ++t) {
    sum.add(seq.at(t));
    collected += seq.at(t)(actions[static_cast<std::size_t>(t - 1)]);
  }
  return sum.value_at(sum.maximizer(seq.domain)) - collected;
}

double stationary_regret(const MasterTrace& trace, const ObjectiveSequence& seq) {
  return stationary_regret(actions_of(trace), seq);
}

std::vector<RegretRow> regret_rows(const std::vector<Point>& actions, const ObjectiveSequence& seq) {
  check_length(actions.size(), seq);
  std::vector<RegretRow> rows;
  rows.reserve(actions.size());
  QuadraticSum sum;
  double collected = 0.0;
  double dynamic = 0.0;
  for (int t = 1; t <= seq.horizon(); ++t) {
    const auto& f = seq.at(t);
    const double value = f(actions[static_cast<std::size_t>(t - 1)]);
    const double inst = optimum(f).value - value;
    dynamic += inst;
    collected += value;
    sum.add(f);
    rows.push_back({t, inst, dynamic, sum.value_at(sum.maximizer(seq.domain)) - collected});
  }
  return rows;
}

AuditReport audit_confidence(const std::vector<double>& y, const std::vector<double>& rbar,
                              const ObjectiveSequence& seq, const RhoFunction& rho, double lambda) {
  if (y.size() != rbar.size()) throw std::invalid_argument("audit: y and rbar lengths differ");
  check_length(y.size(), seq);
  const auto variation = seq.cumulative_variation();

  AuditReport report;
  report.lambda = lambda;
  report.rows.reserve(y.size());
  double min_opt = std::numeric_limits<double>::infinity();
  double gap = 0.0;
  for (int t = 1; t <= seq.horizon(); ++t) {
    const auto i = static_cast<std::size_t>(t - 1);
    min_opt = std::min(min_opt, optimum(seq.at(t)).value);
    gap += rbar[i] - y[i];
    AuditRow row;
    row.t = t;
    row.rho = rho(t);
    row.variation = variation[i];
    row.rbar = rbar[i];
    row.min_optimum = min_opt;
    row.mean_gap = gap / t;
    // lambda * Delta <= rho(t) is the scope clause without dividing by lambda.
    row.in_scope = lambda * row.variation <= row.rho;
    row.property1 = row.rbar >= min_opt - lambda * row.variation;
    row.property2 = row.mean_gap <= row.rho + lambda * row.variation;
    if (row.in_scope) {
      ++report.in_scope;
      if (!row.property1) ++report.property1_violations;
      if (!row.property2) ++report.property2_violations;
    }
    report.rows.push_back(row);
  }
  return report;
}

AuditReport audit_confidence(const MasterTrace& trace, const ObjectiveSequence& seq, const RhoFunction& rho,
                              double lambda) {
  std::vector<double> y, rbar;
  y.reserve(trace.steps.size());
  rbar.reserve(trace.steps.size());
  for (const auto& s : trace.steps) {
    y.push_back(s.y);
    rbar.push_back(s.rbar);
  }
  return audit_confidence(y, rbar, seq, rho, lambda);
}

}  // namespace nsbo
