#include "qsched/regret.hpp"

#include "qsched/oracles.hpp"

#include <doctest.h>

#include <stdexcept>
#include <vector>

namespace {

using namespace qsched;

// Policy plays arm 1 while arm 0 alternates 1,0,1; every credited gain is 0.
ScheduleTrace zero_credit_trace() {
  ScheduleTrace trace;
  trace.arms = {1, 0, 1};
  trace.observed_gains = Eigen::Vector3d(0.0, 0.0, 0.0);
  return trace;
}

Eigen::MatrixXd alternating_services() {
  Eigen::MatrixXd services(3, 2);
  services << 1, 0,  //
      0, 1,          //
      1, 0;
  return services;
}

ScheduleTrace random_trace(const Eigen::MatrixXd& services, RngStream& rng) {
  ScheduleTrace trace;
  const long horizon = services.rows();
  trace.arms.resize(static_cast<std::size_t>(horizon));
  trace.observed_gains.resize(horizon);
  for (long t = 0; t < horizon; ++t) {
    const int arm = rng.next_index(static_cast<int>(services.cols()));
    trace.arms[static_cast<std::size_t>(t)] = arm;
    trace.observed_gains(t) = services(t, arm);
  }
  return trace;
}

void check_reports_identical(const IntervalRegretReport& got, const IntervalRegretReport& want) {
  CHECK(got.max_regret == want.max_regret);
  CHECK(got.start == want.start);
  CHECK(got.end == want.end);
  CHECK(got.best_arm == want.best_arm);
  CHECK(got.accounting == want.accounting);
  CHECK(got.per_prefix == want.per_prefix);
}

}  // namespace

TEST_SUITE("regret") {

TEST_CASE("a zero-credit schedule loses the full best-arm sum") {
  const Eigen::MatrixXd services = alternating_services();
  const ScheduleTrace trace = zero_credit_trace();

  const IntervalRegretReport report = max_interval_regret(services, trace);
  CHECK(report.max_regret == 2.0);
  CHECK(report.start == 1);
  CHECK(report.end == 3);
  CHECK(report.best_arm == 0);
  CHECK(report.accounting == Accounting::Realized);
  CHECK(report.per_prefix == Eigen::Vector3d(1.0, 1.0, 2.0));

  CHECK(interval_regret(services, trace, 1, 3) == 2.0);
  CHECK(interval_regret(services, trace, 2, 3) == 1.0);
  CHECK(interval_regret(services, trace, 2, 2) == 1.0);
}

TEST_CASE("window bounds are validated") {
  const Eigen::MatrixXd services = alternating_services();
  const ScheduleTrace trace = zero_credit_trace();
  CHECK_THROWS_AS(interval_regret(services, trace, 0, 2), std::invalid_argument);
  CHECK_THROWS_AS(interval_regret(services, trace, 1, 4), std::invalid_argument);
  CHECK_THROWS_AS(interval_regret(services, trace, 3, 2), std::invalid_argument);
}

TEST_CASE("observed gains must match the service matrix") {
  const Eigen::MatrixXd services = alternating_services();
  ScheduleTrace trace = zero_credit_trace();
  trace.observed_gains(1) = 0.5;
  CHECK_THROWS_WITH_AS(max_interval_regret(services, trace),
                       doctest::Contains("disagrees with services at slot 2"),
                       std::invalid_argument);

  trace = zero_credit_trace();
  trace.arms[0] = 2;
  CHECK_THROWS_AS(max_interval_regret(services, trace), std::invalid_argument);

  trace = zero_credit_trace();
  trace.arms.pop_back();
  CHECK_THROWS_AS(max_interval_regret(services, trace), std::invalid_argument);
}

TEST_CASE("ties resolve to the earliest end then start then arm") {
  // Arm 0 beats the played arm by (1, -1, 1): windows [1,1], [3,3] and [1,3]
  // all tie at value 1, so the earliest end wins.
  Eigen::MatrixXd services(3, 2);
  services << 1, 0,  //
      0, 1,          //
      1, 0;
  ScheduleTrace trace;
  trace.arms = {1, 1, 1};
  trace.observed_gains = Eigen::Vector3d(0.0, 1.0, 0.0);

  const IntervalRegretReport report = max_interval_regret(services, trace);
  CHECK(report.max_regret == 1.0);
  CHECK(report.start == 1);
  CHECK(report.end == 1);
  CHECK(report.best_arm == 0);

  // Both arms tie everywhere at zero: the first window and lowest arm win.
  Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(2, 2, 0.5);
  ScheduleTrace flat_trace;
  flat_trace.arms = {0, 0};
  flat_trace.observed_gains = Eigen::Vector2d(0.5, 0.5);
  const IntervalRegretReport flat_report = max_interval_regret(flat, flat_trace);
  CHECK(flat_report.max_regret == 0.0);
  CHECK(flat_report.start == 1);
  CHECK(flat_report.end == 1);
  CHECK(flat_report.best_arm == 0);
}

TEST_CASE("expected accounting credits the play distribution") {
  Eigen::MatrixXd services(2, 2);
  services << 1, 0,  //
      0, 1;
  const Eigen::MatrixXd plays = Eigen::MatrixXd::Constant(2, 2, 0.5);

  const IntervalRegretReport report = max_interval_regret_expected(services, plays);
  CHECK(report.max_regret == 0.5);
  CHECK(report.start == 1);
  CHECK(report.end == 1);
  CHECK(report.best_arm == 0);
  CHECK(report.accounting == Accounting::Expected);
  CHECK(report.per_prefix == Eigen::Vector2d(0.5, 0.5));

  CHECK_THROWS_AS(max_interval_regret_expected(services, Eigen::MatrixXd::Constant(2, 3, 0.5)),
                  std::invalid_argument);
}

TEST_CASE("the scan matches exhaustive window enumeration") {
  RngStream rng(404, StreamId{StreamPurpose::Audit, 0, 0, 0});
  for (int trial = 0; trial < 50; ++trial) {
    const long horizon = 1 + rng.next_index(64);
    const int n_arms = 1 + rng.next_index(4);
    Eigen::MatrixXd services(horizon, n_arms);
    for (long t = 0; t < horizon; ++t)
      for (int i = 0; i < n_arms; ++i) services(t, i) = rng.next_double();
    // Coarse rates make value ties common enough to exercise the ordering.
    if (trial % 2 == 0)
      services = ((services.array() * 4.0).floor() / 4.0).matrix();

    const ScheduleTrace trace = random_trace(services, rng);
    check_reports_identical(max_interval_regret(services, trace),
                            oracles::max_interval_regret_bruteforce(services, trace));

    Eigen::MatrixXd plays(horizon, n_arms);
    for (long t = 0; t < horizon; ++t) {
      for (int i = 0; i < n_arms; ++i) plays(t, i) = 0.05 + rng.next_double();
      plays.row(t) /= plays.row(t).sum();
    }
    check_reports_identical(max_interval_regret_expected(services, plays),
                            oracles::max_interval_regret_expected_bruteforce(services, plays));
  }
}

TEST_CASE("domination allows only tolerance-sized excursions") {
  IntervalRegretReport report;
  report.max_regret = 2.0;
  CHECK(check_pathwise_domination(1.5, report));
  CHECK(check_pathwise_domination(2.0, report));
  CHECK(check_pathwise_domination(2.0 + 1e-10, report));
  CHECK_FALSE(check_pathwise_domination(2.1, report));
}

TEST_CASE("learning-rate bounds take their closed forms") {
  CHECK(theorem1_bound(0.5, 32) == 4.0);
  CHECK(theorem1_bound(1.0, 1024) == doctest::Approx(45.254833995939045).epsilon(1e-14));
  CHECK(theorem2_bound(1, 1, 0.5) == doctest::Approx(7.0156985971375505).epsilon(1e-14));
  CHECK(theorem2_bound(5, 10000, 0.1) == doctest::Approx(39179.871917254757).epsilon(1e-14));

  CHECK_THROWS_AS(theorem1_bound(0.0, 32), std::invalid_argument);
  CHECK_THROWS_AS(theorem1_bound(1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(theorem2_bound(0, 10, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(theorem2_bound(2, 0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(theorem2_bound(2, 10, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(theorem2_bound(2, 10, 1.0), std::invalid_argument);
}

TEST_CASE("the importance-weighted estimator is unbiased and norm-capped") {
  const ProbabilityVector p(Eigen::Vector3d(0.5, 0.3, 0.2));
  const Eigen::Vector3d gains(0.9, 0.5, 0.2);
  RngStream rng(99, StreamId{StreamPurpose::Audit, 0, 0, 0});

  const UnbiasednessReport report = estimator_unbiasedness_test(p, 0.3, gains, 200000, rng);
  CHECK(report.max_abs_error < 0.02);
  CHECK(report.max_estimate_norm <= (3.0 / 0.3) * (1.0 + 1e-12));

  CHECK_THROWS_AS(estimator_unbiasedness_test(p, 0.3, Eigen::Vector2d(0.5, 0.5), 10, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(estimator_unbiasedness_test(p, 0.3, Eigen::Vector3d(0.5, 1.5, 0.5), 10, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(estimator_unbiasedness_test(p, 0.3, gains, 0, rng), std::invalid_argument);
}

}  // TEST_SUITE
