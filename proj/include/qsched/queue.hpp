#pragma once

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace qsched {

struct LindleyStep {
  double next_length;
  double departed;
};

// Q' = max(0, Q + a - s); departures are capped by queue content plus the
// slot's arrival, so work is conserved.
inline LindleyStep lindley_step(double queue, double arrival, double service) {
  if (!(std::isfinite(queue) && std::isfinite(arrival) && std::isfinite(service)))
    throw std::invalid_argument("lindley_step: non-finite input");
  if (queue < 0.0 || arrival < 0.0 || service < 0.0)
    throw std::invalid_argument("lindley_step: negative input");
  return LindleyStep{std::max(0.0, queue + arrival - service),
                     std::min(queue + arrival, service)};
}

// lengths has T+1 entries with lengths(0) = 0; departures has T.
struct QueueTrace {
  Eigen::VectorXd lengths;
  Eigen::VectorXd departures;
  long horizon() const { return departures.size(); }
};

inline QueueTrace queue_trajectory(const Eigen::Ref<const Eigen::VectorXd>& arrivals,
                                   const Eigen::Ref<const Eigen::VectorXd>& served_rates) {
  const Eigen::Index horizon = arrivals.size();
  if (horizon < 1) throw std::invalid_argument("queue_trajectory: empty horizon");
  if (served_rates.size() != horizon)
    throw std::invalid_argument("queue_trajectory: arrivals/services length mismatch");
  QueueTrace trace;
  trace.lengths.resize(horizon + 1);
  trace.departures.resize(horizon);
  trace.lengths(0) = 0.0;
  for (Eigen::Index t = 0; t < horizon; ++t) {
    const LindleyStep step = lindley_step(trace.lengths(t), arrivals(t), served_rates(t));
    trace.lengths(t + 1) = step.next_length;
    trace.departures(t) = step.departed;
  }
  return trace;
}

// Maximum-suffix-sum form of the queue evaluated incrementally:
// Q(t) = max(0, Q(t-1) + b_t). The O(T^2) direct evaluation lives in
// oracles.hpp for cross-checking.
inline Eigen::VectorXd queue_closed_form(const Eigen::Ref<const Eigen::VectorXd>& increments) {
  const Eigen::Index horizon = increments.size();
  if (horizon < 1) throw std::invalid_argument("queue_closed_form: empty sequence");
  if (!increments.allFinite()) throw std::invalid_argument("queue_closed_form: non-finite increment");
  Eigen::VectorXd lengths(horizon);
  double current = 0.0;
  for (Eigen::Index t = 0; t < horizon; ++t) {
    current = std::max(0.0, current + increments(t));
    lengths(t) = current;
  }
  return lengths;
}

struct QueueRegret {
  double value;
  int slot;  // 1-based slot achieving the maximum
  int arm;   // 0-based benchmark arm
};

namespace detail {
inline void check_comparable(const QueueTrace& policy, const std::vector<QueueTrace>& per_arm) {
  if (per_arm.empty()) throw std::invalid_argument("queue regret: no benchmark arms");
  for (const QueueTrace& trace : per_arm)
    if (trace.lengths.size() != policy.lengths.size())
      throw std::invalid_argument("queue regret: benchmark horizon mismatch");
}
}  // namespace detail

// Worst-case gap max over slots and fixed arms of Q_policy(t) - Q_arm(t).
// Signed: a policy that dominates every arm at every slot scores negative.
// Ties go to the smallest slot, then the smallest arm.
inline QueueRegret queue_length_regret(const QueueTrace& policy,
                                       const std::vector<QueueTrace>& per_arm) {
  detail::check_comparable(policy, per_arm);
  QueueRegret best{-std::numeric_limits<double>::infinity(), 0, 0};
  for (Eigen::Index t = 1; t < policy.lengths.size(); ++t) {
    for (std::size_t i = 0; i < per_arm.size(); ++i) {
      const double gap = policy.lengths(t) - per_arm[i].lengths(t);
      if (gap > best.value) best = QueueRegret{gap, static_cast<int>(t), static_cast<int>(i)};
    }
  }
  return best;
}

// Running version of the same maximum: entry t-1 covers slots 1..t.
inline Eigen::VectorXd queue_regret_curve(const QueueTrace& policy,
                                          const std::vector<QueueTrace>& per_arm) {
  detail::check_comparable(policy, per_arm);
  const Eigen::Index horizon = policy.lengths.size() - 1;
  Eigen::VectorXd curve(horizon);
  double running = -std::numeric_limits<double>::infinity();
  for (Eigen::Index t = 1; t <= horizon; ++t) {
    double slot_max = -std::numeric_limits<double>::infinity();
    for (const QueueTrace& trace : per_arm)
      slot_max = std::max(slot_max, policy.lengths(t) - trace.lengths(t));
    running = std::max(running, slot_max);
    curve(t - 1) = running;
  }
  return curve;
}

}  // namespace qsched
