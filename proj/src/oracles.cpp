#include "qsched/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace qsched::oracles {

namespace {

// Best window under the ordering (value desc, end asc, start asc, arm asc),
// found by full enumeration. Inner sums accumulate left to right from each
// start, matching the scan's arithmetic exactly.
IntervalRegretReport enumerate_windows(const Eigen::MatrixXd& services,
                                       const Eigen::VectorXd& credit, Accounting accounting) {
  const long horizon = services.rows();
  const int n_arms = static_cast<int>(services.cols());

  double best_value = -std::numeric_limits<double>::infinity();
  int best_start = 0, best_end = -1, best_arm = 0;
  IntervalRegretReport report;
  report.accounting = accounting;
  report.per_prefix.resize(horizon);
  report.per_prefix.setConstant(-std::numeric_limits<double>::infinity());

  for (int arm = 0; arm < n_arms; ++arm) {
    for (long start = 0; start < horizon; ++start) {
      double sum = 0.0;
      for (long end = start; end < horizon; ++end) {
        sum += services(end, arm) - credit(end);
        const bool wins =
            sum > best_value ||
            (sum == best_value &&
             (end < best_end || (end == best_end && (start < best_start ||
                                                     (start == best_start && arm < best_arm)))));
        if (wins) {
          best_value = sum;
          best_start = static_cast<int>(start);
          best_end = static_cast<int>(end);
          best_arm = arm;
        }
        report.per_prefix(end) = std::max(report.per_prefix(end), sum);
      }
    }
  }
  // per_prefix(t) is the best window inside [1, t]: a running maximum.
  for (long t = 1; t < horizon; ++t)
    report.per_prefix(t) = std::max(report.per_prefix(t), report.per_prefix(t - 1));

  report.max_regret = best_value;
  report.start = best_start + 1;
  report.end = best_end + 1;
  report.best_arm = best_arm;
  return report;
}

}  // namespace

Eigen::VectorXd project_grid_search(const Eigen::Ref<const Eigen::VectorXd>& v, double step) {
  if (v.size() < 1 || v.size() > 3)
    throw std::invalid_argument("project_grid_search: supports only 1 <= N <= 3");
  if (!(step > 0.0 && step <= 1.0)) throw std::invalid_argument("project_grid_search: bad step");

  const long cells = static_cast<long>(std::llround(1.0 / step));
  Eigen::VectorXd best = Eigen::VectorXd::Zero(v.size());
  double best_distance = std::numeric_limits<double>::infinity();
  const auto consider = [&](const Eigen::VectorXd& w) {
    const double distance = (w - v).squaredNorm();
    if (distance < best_distance) {
      best_distance = distance;
      best = w;
    }
  };

  if (v.size() == 1) {
    best << 1.0;
    return best;
  }
  if (v.size() == 2) {
    Eigen::VectorXd w(2);
    for (long a = 0; a <= cells; ++a) {
      const double x = static_cast<double>(a) / static_cast<double>(cells);
      w << x, 1.0 - x;
      consider(w);
    }
    return best;
  }
  Eigen::VectorXd w(3);
  for (long a = 0; a <= cells; ++a) {
    const double x = static_cast<double>(a) / static_cast<double>(cells);
    for (long b = 0; a + b <= cells; ++b) {
      const double y = static_cast<double>(b) / static_cast<double>(cells);
      w << x, y, 1.0 - x - y;
      consider(w);
    }
  }
  return best;
}

Eigen::VectorXd queue_suffix_max(const Eigen::Ref<const Eigen::VectorXd>& increments) {
  const long horizon = increments.size();
  if (horizon < 1) throw std::invalid_argument("queue_suffix_max: empty sequence");
  Eigen::VectorXd lengths(horizon);
  for (long t = 0; t < horizon; ++t) {
    double best = 0.0;  // the empty suffix
    for (long start = 0; start <= t; ++start) {
      double sum = 0.0;
      for (long tau = start; tau <= t; ++tau) sum += increments(tau);
      best = std::max(best, sum);
    }
    lengths(t) = best;
  }
  return lengths;
}

IntervalRegretReport max_interval_regret_bruteforce(const Eigen::MatrixXd& services,
                                                    const ScheduleTrace& trace) {
  const long horizon = services.rows();
  if (trace.horizon() != horizon || trace.observed_gains.size() != horizon)
    throw std::invalid_argument("max_interval_regret_bruteforce: trace shape mismatch");
  Eigen::VectorXd credit(horizon);
  for (long t = 0; t < horizon; ++t) {
    const int arm = trace.arms[static_cast<std::size_t>(t)];
    if (arm < 0 || arm >= services.cols())
      throw std::invalid_argument("max_interval_regret_bruteforce: arm out of range");
    credit(t) = services(t, arm);
  }
  return enumerate_windows(services, credit, Accounting::Realized);
}

IntervalRegretReport max_interval_regret_expected_bruteforce(
    const Eigen::MatrixXd& services, const Eigen::MatrixXd& play_distributions) {
  if (play_distributions.rows() != services.rows() ||
      play_distributions.cols() != services.cols())
    throw std::invalid_argument("max_interval_regret_expected_bruteforce: shape mismatch");
  Eigen::VectorXd credit(services.rows());
  for (long t = 0; t < services.rows(); ++t)
    credit(t) = services.row(t).dot(play_distributions.row(t));
  return enumerate_windows(services, credit, Accounting::Expected);
}

}  // namespace qsched::oracles
