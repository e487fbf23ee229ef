#include "qsched/experiment.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace {

using namespace qsched;

std::string write_temp(const std::string& name, const std::string& content) {
  const std::filesystem::path path = std::filesystem::temp_directory_path() / name;
  std::ofstream file(path);
  file << content;
  file.close();
  return path.string();
}

std::string micro_json() {
  return R"({
    "schema_version": 1,
    "n_arms": 2,
    "horizon": 50,
    "num_runs": 3,
    "master_seed": 123,
    "channel": {"model": "iid_uniform"},
    "arrivals": {"model": "uniform_rate", "lambda": 0.3},
    "policies": ["fixed:1", "uniform"]
  })";
}

void check_curves_identical(const AggregateResult& a, const AggregateResult& b) {
  CHECK(a.mean == b.mean);
  CHECK(a.sem == b.sem);
  CHECK(a.policies == b.policies);
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("json configs round-trip into typed settings") {
  const ExperimentConfig config = parse_config(micro_json(), "micro");
  CHECK(config.schema_version == 1);
  CHECK(config.n_arms == 2);
  CHECK(config.horizon == 50);
  CHECK(config.num_runs == 3);
  CHECK(config.master_seed == 123);
  CHECK(config.channel.kind == ChannelModel::Kind::IidUniform);
  CHECK(config.arrivals.kind == ArrivalModel::Kind::UniformRate);
  REQUIRE(config.arrivals.lambda.has_value());
  CHECK(*config.arrivals.lambda == 0.3);
  CHECK(config.policies == std::vector<std::string>{"fixed:1", "uniform"});
  CHECK(config.audit.interval_regret);
  CHECK(config.audit.domination);
  CHECK(config.audit.theorem_bounds);
  CHECK(config.audit.delta == 0.1);
  CHECK(config.topology_path.empty());

  const ExperimentConfig full = parse_config(R"({
    "schema_version": 1,
    "n_arms": 3,
    "horizon": 200,
    "num_runs": 5,
    "master_seed": 9,
    "channel": {"model": "block_markov", "num_blocks": 4, "initial_rate": 0.5},
    "arrivals": {"model": "uniform_rate", "lambda": "auto", "epsilon": 0.1},
    "policies": ["wamab"],
    "audit": {"interval_regret": false, "domination": true, "theorem_bounds": false,
              "delta": 0.2},
    "topology": "net.csv"
  })",
                                              "full");
  CHECK(full.channel.kind == ChannelModel::Kind::BlockMarkov);
  CHECK(full.channel.num_blocks == 4);
  REQUIRE(full.channel.initial_rate.has_value());
  CHECK(*full.channel.initial_rate == 0.5);
  CHECK_FALSE(full.arrivals.lambda.has_value());
  CHECK(full.arrivals.epsilon == 0.1);
  CHECK_FALSE(full.audit.interval_regret);
  CHECK(full.audit.domination);
  CHECK_FALSE(full.audit.theorem_bounds);
  CHECK(full.audit.delta == 0.2);
  CHECK(full.topology_path == "net.csv");
}

TEST_CASE("malformed configs name the offending key") {
  const auto reject = [](const std::string& json, const char* needle) {
    CHECK_THROWS_WITH_AS(parse_config(json, "cfg"), doctest::Contains(needle),
                         std::runtime_error);
  };

  reject("{", "invalid JSON");
  reject(R"({"schema_version": 2})", "unsupported schema_version 2");
  reject(R"({"schema_version": 1, "n_arms": 2, "horizon": 10, "num_runs": 1,
             "master_seed": 0, "channel": {"model": "iid_uniform"},
             "arrivals": {"model": "constant", "value": 1.0},
             "policies": ["uniform"], "extra": 1})",
         "unknown key 'extra'");
  reject(R"({"schema_version": 1, "n_arms": 2, "num_runs": 1,
             "master_seed": 0, "channel": {"model": "iid_uniform"},
             "arrivals": {"model": "constant", "value": 1.0},
             "policies": ["uniform"]})",
         "missing key 'horizon'");
  reject(R"({"schema_version": 1, "n_arms": 2, "horizon": 10, "num_runs": 1,
             "master_seed": -4, "channel": {"model": "iid_uniform"},
             "arrivals": {"model": "constant", "value": 1.0},
             "policies": ["uniform"]})",
         "'master_seed' must be a nonnegative integer");
  reject(R"({"schema_version": 1, "n_arms": 2, "horizon": 10, "num_runs": 0,
             "master_seed": 0, "channel": {"model": "iid_uniform"},
             "arrivals": {"model": "constant", "value": 1.0},
             "policies": ["uniform"]})",
         "'num_runs' must lie in [1, 1e6]");
  reject(R"({"schema_version": 1, "n_arms": 2, "horizon": 10, "num_runs": 1,
             "master_seed": 0, "channel": {"model": "iid_uniform"},
             "arrivals": {"model": "constant", "value": 1.0},
             "policies": ["uniform", "uniform"]})",
         "lists 'uniform' twice");
  reject(R"({"schema_version": 1, "n_arms": 2, "horizon": 10, "num_runs": 1,
             "master_seed": 0, "channel": {"model": "iid_uniform"},
             "arrivals": {"model": "constant", "value": 1.0},
             "policies": ["ucb"]})",
         "'policies'");
  reject(R"({"schema_version": 1, "n_arms": 2, "horizon": 10, "num_runs": 1,
             "master_seed": 0, "channel": {"model": "iid_uniform"},
             "arrivals": {"model": "uniform_rate", "lambda": "later"},
             "policies": ["uniform"]})",
         "'lambda' must be a number or \"auto\"");
  reject(R"({"schema_version": 1, "n_arms": 2, "horizon": 10, "num_runs": 1,
             "master_seed": 0, "channel": {"model": "iid_uniform", "num_blocks": 3},
             "arrivals": {"model": "constant", "value": 1.0},
             "policies": ["uniform"]})",
         "unknown key 'num_blocks'");
  reject(R"({"schema_version": 1, "n_arms": 2, "horizon": 10, "num_runs": 1,
             "master_seed": 0, "channel": {"model": "iid_uniform"},
             "arrivals": {"model": "constant", "value": 1.0},
             "policies": ["uniform"],
             "audit": {"delta": 1.5}})",
         "'delta' must lie in (0,1)");
}

TEST_CASE("configs load from disk with the path as origin") {
  const std::string path = write_temp("qsched_config_ok.json", micro_json());
  const ExperimentConfig config = load_config(path);
  CHECK(config.horizon == 50);
  CHECK_THROWS_WITH_AS(load_config("/nonexistent/config.json"),
                       doctest::Contains("cannot open config"), std::runtime_error);

  const std::string bad = write_temp("qsched_config_bad.json", R"({"schema_version": 2})");
  CHECK_THROWS_WITH_AS(load_config(bad), doctest::Contains(bad.c_str()), std::runtime_error);
}

TEST_CASE("scaling shrinks the workload and clamps at one") {
  ExperimentConfig config = parse_config(micro_json(), "micro");
  config.horizon = 10000;
  config.num_runs = 500;
  apply_scale(config, 10);
  CHECK(config.horizon == 1000);
  CHECK(config.num_runs == 50);
  apply_scale(config, 1000000);
  CHECK(config.horizon == 1);
  CHECK(config.num_runs == 1);
  CHECK_THROWS_AS(apply_scale(config, 0), std::invalid_argument);
}

TEST_CASE("identical channels leave no room for regret") {
  std::string trace = "t,s1,s2\n";
  for (int t = 1; t <= 20; ++t) {
    const double rate = 0.25 + 0.5 * ((t % 4) / 4.0);
    trace += std::to_string(t) + "," + std::to_string(rate) + "," + std::to_string(rate) + "\n";
  }
  const std::string trace_path = write_temp("qsched_equal_channels.csv", trace);

  ExperimentConfig config = parse_config(micro_json(), "micro");
  config.horizon = 20;
  config.channel = ChannelModel::trace(trace_path);
  config.policies = {"uniform", "wamab", "fixed:0"};

  const RunResult result = run_single(config, 1);
  for (const PolicyRunOutcome& outcome : result.policies) {
    CHECK(outcome.regret_curve == Eigen::VectorXd::Zero(20));
    CHECK(outcome.queue_regret.value == 0.0);
    REQUIRE(outcome.domination_ok.has_value());
    CHECK(*outcome.domination_ok);
  }
}

TEST_CASE("a run is a pure function of config and run index") {
  const ExperimentConfig config = parse_config(micro_json(), "micro");
  const RunResult first = run_single(config, 2);
  const RunResult second = run_single(config, 2);
  REQUIRE(first.policies.size() == second.policies.size());
  for (std::size_t p = 0; p < first.policies.size(); ++p) {
    CHECK(first.policies[p].regret_curve == second.policies[p].regret_curve);
    CHECK(first.policies[p].schedule.arms == second.policies[p].schedule.arms);
    CHECK(first.policies[p].schedule.observed_gains == second.policies[p].schedule.observed_gains);
  }

  const RunResult other = run_single(config, 3);
  bool any_difference = false;
  for (std::size_t p = 0; p < first.policies.size(); ++p)
    any_difference |= first.policies[p].schedule.observed_gains !=
                      other.policies[p].schedule.observed_gains;
  CHECK(any_difference);
}

TEST_CASE("the pipeline matches a direct fixed-arm replay") {
  ExperimentConfig config = parse_config(micro_json(), "micro");
  config.policies = {"fixed:1"};
  const int run_index = 1;

  const RunResult result = run_single(config, run_index);
  const PolicyRunOutcome& outcome = result.policies.at(0);

  const StreamFamily env(config.master_seed, 0, static_cast<std::uint64_t>(run_index));
  const Eigen::MatrixXd services =
      generate_service_matrix(config.channel, config.horizon, config.n_arms, env);
  const Eigen::VectorXd arrivals = generate_arrivals(config.arrivals, config.horizon, env);

  CHECK(outcome.schedule.arms == std::vector<int>(50, 1));
  CHECK(outcome.schedule.observed_gains == services.col(1));

  const QueueTrace policy_queue = queue_trajectory(arrivals, services.col(1));
  const std::vector<QueueTrace> benchmarks = {queue_trajectory(arrivals, services.col(0)),
                                              queue_trajectory(arrivals, services.col(1))};
  CHECK(outcome.regret_curve == queue_regret_curve(policy_queue, benchmarks));
  const QueueRegret direct = queue_length_regret(policy_queue, benchmarks);
  CHECK(outcome.queue_regret.value == direct.value);
  CHECK(outcome.queue_regret.slot == direct.slot);
  CHECK(outcome.queue_regret.arm == direct.arm);
}

TEST_CASE("aggregation averages the per-run curves") {
  ExperimentConfig config = parse_config(micro_json(), "micro");

  const AggregateResult aggregate = run_many(config);
  CHECK(aggregate.horizon == 50);
  CHECK(aggregate.num_runs == 3);
  CHECK(aggregate.mean.rows() == 50);
  CHECK(aggregate.mean.cols() == 2);

  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(50, 2);
  for (int run = 1; run <= 3; ++run) {
    const RunResult result = run_single(config, run);
    for (long p = 0; p < 2; ++p)
      sum.col(p) += result.policies[static_cast<std::size_t>(p)].regret_curve;
  }
  CHECK(aggregate.mean == sum / 3.0);
  CHECK((aggregate.sem.array() >= 0.0).all());

  config.num_runs = 1;
  const AggregateResult single = run_many(config);
  CHECK(single.mean.col(0) == run_single(config, 1).policies[0].regret_curve);
  CHECK(single.sem == Eigen::MatrixXd::Zero(50, 2));
}

TEST_CASE("parallel execution is byte-identical to serial") {
  const ExperimentConfig config = parse_config(micro_json(), "micro");
  check_curves_identical(run_many(config, 1), run_many(config, 4));

  const std::vector<RunResult> serial = run_all(config, 1);
  const std::vector<RunResult> parallel = run_all(config, 4);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t r = 0; r < serial.size(); ++r) {
    CHECK(serial[r].run_index == parallel[r].run_index);
    for (std::size_t p = 0; p < serial[r].policies.size(); ++p)
      CHECK(serial[r].policies[p].regret_curve == parallel[r].policies[p].regret_curve);
  }
}

TEST_CASE("curve csv is slot-major with nine significant digits") {
  AggregateResult aggregate;
  aggregate.horizon = 2;
  aggregate.num_runs = 3;
  aggregate.policies = {"uniform", "fixed:0"};
  aggregate.mean.resize(2, 2);
  aggregate.mean << 0.123456789123, 1.0,  //
      2.5, 0.0;
  aggregate.sem = Eigen::MatrixXd::Zero(2, 2);

  std::ostringstream out;
  emit_csv(aggregate, out);
  CHECK(out.str() ==
        "policy,t,mean_queue_regret,stderr,n_runs\n"
        "uniform,1,0.123456789,0,3\n"
        "fixed:0,1,1,0,3\n"
        "uniform,2,2.5,0,3\n"
        "fixed:0,2,0,0,3\n");
}

TEST_CASE("audit rows expose the per-run certificates") {
  ExperimentConfig config = parse_config(micro_json(), "micro");
  config.policies = {"wamab", "fixed:0"};

  const RunResult result = run_single(config, 1);
  const std::vector<AuditRow> rows = audit_rows(result);

  const auto find_metric = [&](const std::string& metric) {
    for (const AuditRow& row : rows)
      if (row.metric == metric) return row;
    throw std::runtime_error("missing metric " + metric);
  };

  const AuditRow queue_row = find_metric("wamab.queue_regret");
  CHECK(queue_row.run == 1);
  CHECK(queue_row.interval_end.has_value());
  CHECK(queue_row.arm.has_value());
  CHECK_FALSE(queue_row.interval_start.has_value());

  const AuditRow window_row = find_metric("wamab.max_interval_regret");
  CHECK(window_row.interval_start.has_value());
  CHECK(window_row.interval_end.has_value());
  CHECK(window_row.arm.has_value());

  const AuditRow domination_row = find_metric("fixed:0.domination_ok");
  CHECK((domination_row.value == 0.0 || domination_row.value == 1.0));

  CHECK_NOTHROW(find_metric("wamab.theorem2_bound"));
  CHECK_NOTHROW(find_metric("wamab.theorem2_ok"));
  CHECK_THROWS(find_metric("fixed:0.theorem2_bound"));

  std::ostringstream out;
  emit_audit_csv(rows, out);
  const std::string text = out.str();
  CHECK(text.rfind("run,metric,value,interval_start,interval_end,arm\n", 0) == 0);
  CHECK(text.find("1,wamab.max_interval_regret,") != std::string::npos);
}

TEST_CASE("network runs report regret against every joint assignment") {
  const std::string topo_path = write_temp("qsched_topo_line.csv",
                                           "node,next_hop,exogenous\n"
                                           "a,b,1\n"
                                           "b,,0\n");
  ExperimentConfig config = parse_config(micro_json(), "micro");
  config.horizon = 20;
  config.num_runs = 2;
  config.policies = {"round_robin"};
  config.topology_path = topo_path;

  const std::vector<NetworkRunReport> reports = run_network(config);
  REQUIRE(reports.size() == 2);
  CHECK(reports[0].run == 1);
  CHECK(reports[1].run == 2);
  for (const NetworkRunReport& report : reports) {
    CHECK(report.regret.per_node.size() == 2);
    CHECK(report.best.assignment.arms.size() == 2);
    CHECK(report.best.peak_queue >= 0.0);
  }

  const std::vector<NetworkRunReport> again = run_network(config);
  CHECK(reports[0].regret.value == again[0].regret.value);
  CHECK(reports[0].regret.per_node == again[0].regret.per_node);

  const NetworkTopology topology = NetworkTopology::from_csv(topo_path, config.n_arms);
  std::ostringstream out;
  emit_network_csv(topology, reports, out);
  const std::string text = out.str();
  CHECK(text.rfind("run,metric,node,value,assignment\n", 0) == 0);
  CHECK(text.find("network_regret") != std::string::npos);
  CHECK(text.find("best_peak_queue") != std::string::npos);

  config.topology_path.clear();
  CHECK_THROWS_WITH_AS(run_network(config), doctest::Contains("names no topology"),
                       std::invalid_argument);
}

}  // TEST_SUITE
