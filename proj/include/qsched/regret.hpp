#pragma once

#include "qsched/rng.hpp"
#include "qsched/simplex.hpp"

#include <Eigen/Core>

#include <optional>
#include <vector>

namespace qsched {

// What a policy did on one environment: the arm played each slot and the rate
// it observed there. observed_gains must match services(t, arms[t]); the
// audit entry points verify that. play_distributions (T x N) is kept when the
// policy exposes its sampling law.
struct ScheduleTrace {
  std::vector<int> arms;
  Eigen::VectorXd observed_gains;
  std::optional<Eigen::MatrixXd> play_distributions;

  long horizon() const { return static_cast<long>(arms.size()); }
};

enum class Accounting {
  Realized,  // policy credited with the rate of the arm it pulled
  Expected,  // policy credited with <S_t, p_t> under its play distribution
};

struct IntervalRegretReport {
  double max_regret = 0.0;
  int start = 1;  // 1-based, inclusive
  int end = 1;    // 1-based, inclusive
  int best_arm = 0;
  Accounting accounting = Accounting::Realized;
  Eigen::VectorXd per_prefix;  // entry t-1: max over windows contained in [1, t]
};

// Regret of the window [start, end] (1-based, inclusive): the best single arm's
// summed rate minus the policy's summed credited rate.
double interval_regret(const Eigen::MatrixXd& services, const ScheduleTrace& trace, int start,
                       int end);

// Maximum over all windows and arms via a per-arm max-subarray scan, O(N T).
// Ties are broken toward the earliest end, then earliest start, then lowest
// arm; the brute-force oracle in oracles.hpp uses the same ordering.
IntervalRegretReport max_interval_regret(const Eigen::MatrixXd& services,
                                         const ScheduleTrace& trace);
IntervalRegretReport max_interval_regret_expected(const Eigen::MatrixXd& services,
                                                  const Eigen::MatrixXd& play_distributions);

// Queue regret never exceeds the worst window regret (up to 1e-9 slack).
bool check_pathwise_domination(double queue_regret, const IntervalRegretReport& report);

// Deterministic window-regret bound for the full-information learner:
// G sqrt(2 T).
double theorem1_bound(double gain_bound, long horizon);

// High-probability window-regret bound for the bandit scheduler:
// 3 sqrt(N) T^{3/4} (1 + sqrt(ln(3 N T^2 / delta))). Assumes T >= N^2 and
// warns when that fails.
double theorem2_bound(int n_arms, long horizon, double delta);

struct UnbiasednessReport {
  double max_abs_error = 0.0;      // max_i |mean estimate_i - true_gain_i|
  double max_estimate_norm = 0.0;  // max over samples of ||estimate||_2
};

// Monte Carlo check that the inverse-probability estimator is unbiased under
// the two-draw selection law (explore uniformly w.p. gamma, else sample p).
UnbiasednessReport estimator_unbiasedness_test(const ProbabilityVector& p, double gamma,
                                               const Eigen::Ref<const Eigen::VectorXd>& true_gains,
                                               long samples, RngStream& rng);

}  // namespace qsched
