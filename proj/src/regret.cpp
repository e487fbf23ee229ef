#include "qsched/regret.hpp"

#include "qsched/wamab.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <string>

namespace qsched {

namespace {

void warn(const std::string& message) { std::cerr << "warning: " << message << "\n"; }

// Per-slot gain credited to the policy under realized accounting. Also
// validates the trace against the service matrix.
Eigen::VectorXd realized_credit(const Eigen::MatrixXd& services, const ScheduleTrace& trace) {
  const long horizon = services.rows();
  if (horizon < 1) throw std::invalid_argument("interval regret: empty service matrix");
  if (trace.horizon() != horizon)
    throw std::invalid_argument("interval regret: trace/service horizon mismatch");
  if (trace.observed_gains.size() != horizon)
    throw std::invalid_argument("interval regret: observed gain length mismatch");
  Eigen::VectorXd credit(horizon);
  for (long t = 0; t < horizon; ++t) {
    const int arm = trace.arms[static_cast<std::size_t>(t)];
    if (arm < 0 || arm >= services.cols())
      throw std::invalid_argument("interval regret: arm out of range at slot " +
                                  std::to_string(t + 1));
    credit(t) = services(t, arm);
    if (std::abs(trace.observed_gains(t) - credit(t)) > 1e-12)
      throw std::invalid_argument("interval regret: observed gain disagrees with services at slot " +
                                  std::to_string(t + 1));
  }
  return credit;
}

Eigen::VectorXd expected_credit(const Eigen::MatrixXd& services,
                                const Eigen::MatrixXd& play_distributions) {
  if (services.rows() < 1) throw std::invalid_argument("interval regret: empty service matrix");
  if (play_distributions.rows() != services.rows() ||
      play_distributions.cols() != services.cols())
    throw std::invalid_argument("interval regret: play distribution shape mismatch");
  Eigen::VectorXd credit(services.rows());
  for (long t = 0; t < services.rows(); ++t)
    credit(t) = services.row(t).dot(play_distributions.row(t));
  return credit;
}

struct WindowCandidate {
  double value = -std::numeric_limits<double>::infinity();
  int start = 0;  // 0-based here; reports convert to 1-based
  int end = -1;
  int arm = 0;
};

// Ordering shared with the brute-force oracle: larger value wins, then the
// earlier end, then the earlier start, then the lower arm.
bool better(const WindowCandidate& a, const WindowCandidate& b) {
  if (a.value != b.value) return a.value > b.value;
  if (a.end != b.end) return a.end < b.end;
  if (a.start != b.start) return a.start < b.start;
  return a.arm < b.arm;
}

// Max-subarray scan over d_t = services(t, arm) - credit(t), every arm at
// once so the running prefix maxima come out in the same pass.
IntervalRegretReport scan_windows(const Eigen::MatrixXd& services, const Eigen::VectorXd& credit,
                                  Accounting accounting) {
  const long horizon = services.rows();
  const int n_arms = static_cast<int>(services.cols());

  struct Ending {
    double sum = 0.0;
    int start = 0;
  };
  std::vector<Ending> ending(static_cast<std::size_t>(n_arms));

  IntervalRegretReport report;
  report.accounting = accounting;
  report.per_prefix.resize(horizon);
  WindowCandidate best;
  for (long t = 0; t < horizon; ++t) {
    for (int arm = 0; arm < n_arms; ++arm) {
      const double d = services(t, arm) - credit(t);
      Ending& state = ending[static_cast<std::size_t>(arm)];
      // Extend on ties so the earliest start is kept.
      if (t == 0 || state.sum + d < d) {
        state.sum = d;
        state.start = static_cast<int>(t);
      } else {
        state.sum += d;
      }
      const WindowCandidate candidate{state.sum, state.start, static_cast<int>(t), arm};
      if (better(candidate, best)) best = candidate;
    }
    report.per_prefix(t) = best.value;
  }
  report.max_regret = best.value;
  report.start = best.start + 1;
  report.end = best.end + 1;
  report.best_arm = best.arm;
  return report;
}

}  // namespace

double interval_regret(const Eigen::MatrixXd& services, const ScheduleTrace& trace, int start,
                       int end) {
  const Eigen::VectorXd credit = realized_credit(services, trace);
  if (start < 1 || end > services.rows() || start > end)
    throw std::invalid_argument("interval_regret: bad window [" + std::to_string(start) + "," +
                                std::to_string(end) + "]");
  double best = -std::numeric_limits<double>::infinity();
  for (int arm = 0; arm < services.cols(); ++arm) {
    double sum = 0.0;
    for (int t = start - 1; t < end; ++t) sum += services(t, arm) - credit(t);
    best = std::max(best, sum);
  }
  return best;
}

IntervalRegretReport max_interval_regret(const Eigen::MatrixXd& services,
                                         const ScheduleTrace& trace) {
  return scan_windows(services, realized_credit(services, trace), Accounting::Realized);
}

IntervalRegretReport max_interval_regret_expected(const Eigen::MatrixXd& services,
                                                  const Eigen::MatrixXd& play_distributions) {
  return scan_windows(services, expected_credit(services, play_distributions),
                      Accounting::Expected);
}

bool check_pathwise_domination(double queue_regret, const IntervalRegretReport& report) {
  return queue_regret <= report.max_regret + 1e-9;
}

double theorem1_bound(double gain_bound, long horizon) {
  if (!(gain_bound > 0.0)) throw std::invalid_argument("theorem1_bound: gain_bound must be positive");
  if (horizon < 1) throw std::invalid_argument("theorem1_bound: horizon must be positive");
  return gain_bound * std::sqrt(2.0 * static_cast<double>(horizon));
}

double theorem2_bound(int n_arms, long horizon, double delta) {
  if (n_arms < 1) throw std::invalid_argument("theorem2_bound: n_arms must be positive");
  if (horizon < 1) throw std::invalid_argument("theorem2_bound: horizon must be positive");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("theorem2_bound: delta must lie in (0,1)");
  if (horizon < static_cast<long>(n_arms) * n_arms)
    warn("theorem2_bound: horizon " + std::to_string(horizon) + " is below n_arms^2 = " +
         std::to_string(static_cast<long>(n_arms) * n_arms));
  const double n = static_cast<double>(n_arms);
  const double t = static_cast<double>(horizon);
  const double log_term = std::log(3.0 * n * t * t / delta);
  return 3.0 * std::sqrt(n) * std::pow(t, 0.75) * (1.0 + std::sqrt(log_term));
}

UnbiasednessReport estimator_unbiasedness_test(const ProbabilityVector& p, double gamma,
                                               const Eigen::Ref<const Eigen::VectorXd>& true_gains,
                                               long samples, RngStream& rng) {
  if (true_gains.size() != p.size())
    throw std::invalid_argument("estimator_unbiasedness_test: gain dimension mismatch");
  if (!true_gains.allFinite() || (true_gains.array() < 0.0).any() ||
      (true_gains.array() > 1.0).any())
    throw std::invalid_argument("estimator_unbiasedness_test: gains outside [0,1]");
  if (samples < 1) throw std::invalid_argument("estimator_unbiasedness_test: samples must be positive");

  const ProbabilityVector mixed = mix_with_uniform(p, gamma);
  const ProbabilityVector uniform = ProbabilityVector::uniform(p.size());
  Eigen::VectorXd accumulated = Eigen::VectorXd::Zero(p.size());
  UnbiasednessReport report;
  for (long s = 0; s < samples; ++s) {
    const double u_branch = rng.next_double();
    const double u_arm = rng.next_double();
    const int arm = u_branch < gamma ? sample_arm(uniform, u_arm) : sample_arm(p, u_arm);
    const Eigen::VectorXd estimate = estimate_gain(true_gains(arm), arm, mixed);
    report.max_estimate_norm = std::max(report.max_estimate_norm, estimate.norm());
    accumulated += estimate;
  }
  report.max_abs_error =
      (accumulated / static_cast<double>(samples) - true_gains).cwiseAbs().maxCoeff();
  return report;
}

}  // namespace qsched
