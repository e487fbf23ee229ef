#pragma once

#include "qsched/regret.hpp"

#include <Eigen/Core>

namespace qsched::oracles {

// Brute-force reference implementations used to validate the fast paths.
// They deliberately share no code with the implementations they check.

// Dense grid search over the simplex (N <= 3) minimizing Euclidean distance.
Eigen::VectorXd project_grid_search(const Eigen::Ref<const Eigen::VectorXd>& v, double step);

// Direct O(T^2) evaluation of Q(t) = max over suffixes ending at t of the
// suffix sum, floored at zero.
Eigen::VectorXd queue_suffix_max(const Eigen::Ref<const Eigen::VectorXd>& increments);

// O(N T^2) enumeration of every window and arm, same tie ordering as the scan.
IntervalRegretReport max_interval_regret_bruteforce(const Eigen::MatrixXd& services,
                                                    const ScheduleTrace& trace);
IntervalRegretReport max_interval_regret_expected_bruteforce(
    const Eigen::MatrixXd& services, const Eigen::MatrixXd& play_distributions);

}  // namespace qsched::oracles
