#include "qsched/experiment.hpp"

#include "qsched/policy.hpp"
#include "qsched/wamab.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace qsched {

namespace {

using Json = nlohmann::json;

[[noreturn]] void config_error(const std::string& origin, const std::string& message) {
  throw std::runtime_error(origin + ": " + message);
}

const Json& require_key(const Json& object, const char* key, const std::string& origin) {
  if (!object.contains(key)) config_error(origin, std::string("missing key '") + key + "'");
  return object.at(key);
}

void reject_unknown_keys(const Json& object, const std::set<std::string>& allowed,
                         const std::string& origin, const std::string& where) {
  for (const auto& [key, value] : object.items()) {
    (void)value;
    if (!allowed.contains(key)) config_error(origin, "unknown key '" + key + "' in " + where);
  }
}

long get_integer(const Json& object, const char* key, const std::string& origin) {
  const Json& value = require_key(object, key, origin);
  if (!value.is_number_integer())
    config_error(origin, std::string("'") + key + "' must be an integer");
  return value.get<long>();
}

double get_number(const Json& value, const char* key, const std::string& origin) {
  if (!value.is_number()) config_error(origin, std::string("'") + key + "' must be a number");
  return value.get<double>();
}

std::string get_string(const Json& object, const char* key, const std::string& origin) {
  const Json& value = require_key(object, key, origin);
  if (!value.is_string()) config_error(origin, std::string("'") + key + "' must be a string");
  return value.get<std::string>();
}

ChannelModel parse_channel(const Json& object, const std::string& origin) {
  if (!object.is_object()) config_error(origin, "'channel' must be an object");
  const std::string model = get_string(object, "model", origin);
  if (model == "block_markov") {
    reject_unknown_keys(object, {"model", "num_blocks", "initial_rate"}, origin, "channel");
    const long blocks = get_integer(object, "num_blocks", origin);
    if (blocks < 1 || blocks > std::numeric_limits<int>::max())
      config_error(origin, "'num_blocks' must be a positive int");
    std::optional<double> initial;
    if (object.contains("initial_rate"))
      initial = get_number(object.at("initial_rate"), "initial_rate", origin);
    return ChannelModel::block_markov(static_cast<int>(blocks), initial);
  }
  if (model == "iid_uniform") {
    reject_unknown_keys(object, {"model"}, origin, "channel");
    return ChannelModel::iid_uniform();
  }
  if (model == "trace") {
    reject_unknown_keys(object, {"model", "path"}, origin, "channel");
    return ChannelModel::trace(get_string(object, "path", origin));
  }
  config_error(origin, "'channel.model' must be block_markov, iid_uniform, or trace");
}

ArrivalModel parse_arrivals(const Json& object, const std::string& origin) {
  if (!object.is_object()) config_error(origin, "'arrivals' must be an object");
  const std::string model = get_string(object, "model", origin);
  if (model == "uniform_rate") {
    reject_unknown_keys(object, {"model", "lambda", "epsilon"}, origin, "arrivals");
    const Json& lambda_value = require_key(object, "lambda", origin);
    std::optional<double> lambda;
    if (lambda_value.is_string()) {
      if (lambda_value.get<std::string>() != "auto")
        config_error(origin, "'lambda' must be a number or \"auto\"");
    } else {
      lambda = get_number(lambda_value, "lambda", origin);
    }
    double epsilon = 0.05;
    if (object.contains("epsilon")) epsilon = get_number(object.at("epsilon"), "epsilon", origin);
    return ArrivalModel::uniform_rate(lambda, epsilon);
  }
  if (model == "constant") {
    reject_unknown_keys(object, {"model", "value"}, origin, "arrivals");
    return ArrivalModel::constant(get_number(require_key(object, "value", origin), "value", origin));
  }
  if (model == "trace") {
    reject_unknown_keys(object, {"model", "path"}, origin, "arrivals");
    return ArrivalModel::trace(get_string(object, "path", origin));
  }
  config_error(origin, "'arrivals.model' must be uniform_rate, constant, or trace");
}

AuditOptions parse_audit(const Json& object, const std::string& origin) {
  if (!object.is_object()) config_error(origin, "'audit' must be an object");
  reject_unknown_keys(object, {"interval_regret", "domination", "theorem_bounds", "delta"}, origin,
                      "audit");
  AuditOptions options;
  const auto get_flag = [&](const char* key, bool fallback) {
    if (!object.contains(key)) return fallback;
    if (!object.at(key).is_boolean())
      config_error(origin, std::string("'") + key + "' must be a boolean");
    return object.at(key).get<bool>();
  };
  options.interval_regret = get_flag("interval_regret", options.interval_regret);
  options.domination = get_flag("domination", options.domination);
  options.theorem_bounds = get_flag("theorem_bounds", options.theorem_bounds);
  if (object.contains("delta")) options.delta = get_number(object.at("delta"), "delta", origin);
  if (!(options.delta > 0.0 && options.delta < 1.0))
    config_error(origin, "'delta' must lie in (0,1)");
  return options;
}

std::string format_real(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.9g", value);
  return buffer;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text, const std::string& origin) {
  Json root;
  try {
    root = Json::parse(json_text);
  } catch (const Json::parse_error& error) {
    config_error(origin, std::string("invalid JSON: ") + error.what());
  }
  if (!root.is_object()) config_error(origin, "top level must be an object");
  reject_unknown_keys(root,
                      {"schema_version", "n_arms", "horizon", "num_runs", "master_seed", "channel",
                       "arrivals", "policies", "audit", "topology"},
                      origin, "config");

  ExperimentConfig config;
  const long schema = get_integer(root, "schema_version", origin);
  if (schema != 1)
    config_error(origin, "unsupported schema_version " + std::to_string(schema) + " (expected 1)");
  config.schema_version = 1;

  const long n_arms = get_integer(root, "n_arms", origin);
  if (n_arms < 1 || n_arms > 10000) config_error(origin, "'n_arms' must lie in [1, 10000]");
  config.n_arms = static_cast<int>(n_arms);

  config.horizon = get_integer(root, "horizon", origin);
  if (config.horizon < 1) config_error(origin, "'horizon' must be positive");

  const long num_runs = get_integer(root, "num_runs", origin);
  if (num_runs < 1 || num_runs > 1000000) config_error(origin, "'num_runs' must lie in [1, 1e6]");
  config.num_runs = static_cast<int>(num_runs);

  const Json& seed = require_key(root, "master_seed", origin);
  if (!seed.is_number_integer() || (!seed.is_number_unsigned() && seed.get<long long>() < 0))
    config_error(origin, "'master_seed' must be a nonnegative integer");
  config.master_seed = seed.get<std::uint64_t>();

  config.channel = parse_channel(require_key(root, "channel", origin), origin);
  config.arrivals = parse_arrivals(require_key(root, "arrivals", origin), origin);

  const Json& policies = require_key(root, "policies", origin);
  if (!policies.is_array() || policies.empty())
    config_error(origin, "'policies' must be a non-empty array");
  for (const Json& entry : policies) {
    if (!entry.is_string()) config_error(origin, "'policies' entries must be strings");
    const std::string id = entry.get<std::string>();
    try {
      validate_policy_id(id, config.n_arms);
    } catch (const std::exception& error) {
      config_error(origin, std::string("'policies': ") + error.what());
    }
    if (std::find(config.policies.begin(), config.policies.end(), id) != config.policies.end())
      config_error(origin, "'policies' lists '" + id + "' twice");
    config.policies.push_back(id);
  }

  if (root.contains("audit")) config.audit = parse_audit(root.at("audit"), origin);
  if (root.contains("topology")) config.topology_path = get_string(root, "topology", origin);
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error(path + ": cannot open config");
  std::ostringstream text;
  text << file.rdbuf();
  return parse_config(text.str(), path);
}

void apply_scale(ExperimentConfig& config, int factor) {
  if (factor < 1) throw std::invalid_argument("apply_scale: factor must be positive");
  config.horizon = std::max<long>(1, config.horizon / factor);
  config.num_runs = std::max(1, config.num_runs / factor);
}

RunResult run_single(const ExperimentConfig& config, int run_index) {
  if (run_index < 1) throw std::invalid_argument("run_single: run_index is 1-based");
  const auto started = std::chrono::steady_clock::now();

  const long horizon = config.horizon;
  const int n_arms = config.n_arms;
  const StreamFamily env_streams(config.master_seed, 0, static_cast<std::uint64_t>(run_index));
  const Eigen::MatrixXd services =
      generate_service_matrix(config.channel, horizon, n_arms, env_streams);
  const Eigen::VectorXd arrivals =
      generate_arrivals(config.arrivals, horizon, env_streams, &services);

  std::vector<QueueTrace> benchmark_queues;
  benchmark_queues.reserve(static_cast<std::size_t>(n_arms));
  for (int arm = 0; arm < n_arms; ++arm)
    benchmark_queues.push_back(queue_trajectory(arrivals, services.col(arm)));

  RunResult result;
  result.run_index = run_index;
  result.policies.reserve(config.policies.size());
  for (std::size_t policy_index = 0; policy_index < config.policies.size(); ++policy_index) {
    const std::string& id = config.policies[policy_index];
    const std::unique_ptr<Policy> policy = make_policy(id, n_arms, horizon);
    RngStream stream(config.master_seed, StreamId{StreamPurpose::Policy, 0,
                                                  static_cast<std::uint64_t>(run_index),
                                                  policy_index});

    PolicyRunOutcome outcome;
    outcome.policy = id;
    outcome.schedule.arms.resize(static_cast<std::size_t>(horizon));
    outcome.schedule.observed_gains.resize(horizon);
    Eigen::VectorXd served(horizon);
    for (long t = 0; t < horizon; ++t) {
      const int arm = policy->select(stream);
      const double observed = services(t, arm);
      if (const ProbabilityVector* dist = policy->play_distribution()) {
        if (!outcome.schedule.play_distributions)
          outcome.schedule.play_distributions.emplace(horizon, n_arms);
        outcome.schedule.play_distributions->row(t) = dist->weights().transpose();
      }
      policy->feed(arm, observed);
      outcome.schedule.arms[static_cast<std::size_t>(t)] = arm;
      outcome.schedule.observed_gains(t) = observed;
      served(t) = observed;
    }

    const QueueTrace queue = queue_trajectory(arrivals, served);
    outcome.queue_regret = queue_length_regret(queue, benchmark_queues);
    outcome.regret_curve = queue_regret_curve(queue, benchmark_queues);

    const bool is_wamab = id == "wamab";
    const bool need_interval = config.audit.interval_regret || config.audit.domination ||
                               (config.audit.theorem_bounds && is_wamab);
    if (need_interval) {
      IntervalRegretReport report = max_interval_regret(services, outcome.schedule);
      if (config.audit.domination)
        outcome.domination_ok = check_pathwise_domination(outcome.queue_regret.value, report);
      if (config.audit.theorem_bounds && is_wamab) {
        outcome.theorem2 = theorem2_bound(n_arms, horizon, config.audit.delta);
        outcome.theorem2_ok = report.max_regret <= *outcome.theorem2;
      }
      if (config.audit.interval_regret) outcome.interval = std::move(report);
    }
    result.policies.push_back(std::move(outcome));
  }

  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

namespace {

// Computes runs 1..num_runs in waves of `jobs` threads and hands each result
// to the sink in ascending run order, so any accumulation the sink performs
// is independent of the parallelism level.
void for_each_run(const ExperimentConfig& config, int jobs,
                  const std::function<void(RunResult&&)>& sink) {
  if (jobs < 1) throw std::invalid_argument("jobs must be positive");
  const int num_runs = config.num_runs;
  for (int wave_start = 1; wave_start <= num_runs; wave_start += jobs) {
    const int wave_size = std::min(jobs, num_runs - wave_start + 1);
    std::vector<RunResult> wave(static_cast<std::size_t>(wave_size));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(wave_size));
    if (wave_size == 1) {
      wave[0] = run_single(config, wave_start);
    } else {
      std::vector<std::thread> workers;
      workers.reserve(static_cast<std::size_t>(wave_size));
      for (int slot = 0; slot < wave_size; ++slot) {
        workers.emplace_back([&, slot] {
          try {
            wave[static_cast<std::size_t>(slot)] = run_single(config, wave_start + slot);
          } catch (...) {
            errors[static_cast<std::size_t>(slot)] = std::current_exception();
          }
        });
      }
      for (std::thread& worker : workers) worker.join();
      for (const std::exception_ptr& error : errors)
        if (error) std::rethrow_exception(error);
    }
    for (RunResult& result : wave) sink(std::move(result));
  }
}

}  // namespace

AggregateResult run_many(const ExperimentConfig& config, int jobs) {
  AggregateResult aggregate;
  aggregate.horizon = config.horizon;
  aggregate.num_runs = config.num_runs;
  aggregate.policies = config.policies;
  const long n_policies = static_cast<long>(config.policies.size());
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(config.horizon, n_policies);
  Eigen::MatrixXd sum_squares = Eigen::MatrixXd::Zero(config.horizon, n_policies);

  for_each_run(config, jobs, [&](RunResult&& result) {
    for (long p = 0; p < n_policies; ++p) {
      const Eigen::VectorXd& curve = result.policies[static_cast<std::size_t>(p)].regret_curve;
      sum.col(p) += curve;
      sum_squares.col(p) += curve.cwiseProduct(curve);
    }
  });

  const double runs = static_cast<double>(config.num_runs);
  aggregate.mean = sum / runs;
  if (config.num_runs > 1) {
    const Eigen::MatrixXd variance =
        ((sum_squares - runs * aggregate.mean.cwiseProduct(aggregate.mean)) / (runs - 1.0))
            .cwiseMax(0.0);
    aggregate.sem = (variance / runs).cwiseSqrt();
  } else {
    aggregate.sem = Eigen::MatrixXd::Zero(config.horizon, n_policies);
  }
  return aggregate;
}

std::vector<RunResult> run_all(const ExperimentConfig& config, int jobs) {
  std::vector<RunResult> results;
  results.reserve(static_cast<std::size_t>(config.num_runs));
  for_each_run(config, jobs, [&](RunResult&& result) { results.push_back(std::move(result)); });
  return results;
}

void emit_csv(const AggregateResult& result, std::ostream& out) {
  out << "policy,t,mean_queue_regret,stderr,n_runs\n";
  for (long t = 0; t < result.horizon; ++t)
    for (std::size_t p = 0; p < result.policies.size(); ++p)
      out << result.policies[p] << ',' << (t + 1) << ','
          << format_real(result.mean(t, static_cast<long>(p))) << ','
          << format_real(result.sem(t, static_cast<long>(p))) << ',' << result.num_runs << '\n';
}

std::vector<AuditRow> audit_rows(const RunResult& result) {
  std::vector<AuditRow> rows;
  for (const PolicyRunOutcome& outcome : result.policies) {
    AuditRow queue_row;
    queue_row.run = result.run_index;
    queue_row.metric = outcome.policy + ".queue_regret";
    queue_row.value = outcome.queue_regret.value;
    queue_row.interval_end = outcome.queue_regret.slot;
    queue_row.arm = outcome.queue_regret.arm;
    rows.push_back(queue_row);

    if (outcome.interval) {
      AuditRow row;
      row.run = result.run_index;
      row.metric = outcome.policy + ".max_interval_regret";
      row.value = outcome.interval->max_regret;
      row.interval_start = outcome.interval->start;
      row.interval_end = outcome.interval->end;
      row.arm = outcome.interval->best_arm;
      rows.push_back(row);
    }
    if (outcome.domination_ok) {
      AuditRow row;
      row.run = result.run_index;
      row.metric = outcome.policy + ".domination_ok";
      row.value = *outcome.domination_ok ? 1.0 : 0.0;
      rows.push_back(row);
    }
    if (outcome.theorem2) {
      AuditRow row;
      row.run = result.run_index;
      row.metric = outcome.policy + ".theorem2_bound";
      row.value = *outcome.theorem2;
      rows.push_back(row);
    }
    if (outcome.theorem2_ok) {
      AuditRow row;
      row.run = result.run_index;
      row.metric = outcome.policy + ".theorem2_ok";
      row.value = *outcome.theorem2_ok ? 1.0 : 0.0;
      rows.push_back(row);
    }
  }
  return rows;
}

void emit_audit_csv(const std::vector<AuditRow>& rows, std::ostream& out) {
  out << "run,metric,value,interval_start,interval_end,arm\n";
  for (const AuditRow& row : rows) {
    out << row.run << ',' << row.metric << ',' << format_real(row.value) << ',';
    if (row.interval_start) out << *row.interval_start;
    out << ',';
    if (row.interval_end) out << *row.interval_end;
    out << ',';
    if (row.arm) out << *row.arm;
    out << '\n';
  }
}

std::vector<NetworkRunReport> run_network(const ExperimentConfig& config) {
  if (config.topology_path.empty())
    throw std::invalid_argument("run_network: config names no topology");
  const NetworkTopology topology = NetworkTopology::from_csv(config.topology_path, config.n_arms);
  const std::vector<JointAssignment> assignments =
      enumerate_joint_assignments(config.n_arms, topology.size());

  std::vector<NetworkRunReport> reports;
  reports.reserve(static_cast<std::size_t>(config.num_runs));
  for (int run = 1; run <= config.num_runs; ++run) {
    std::vector<Eigen::MatrixXd> services;
    std::vector<Eigen::VectorXd> arrivals;
    services.reserve(static_cast<std::size_t>(topology.size()));
    arrivals.reserve(static_cast<std::size_t>(topology.size()));
    for (int v = 0; v < topology.size(); ++v) {
      const StreamFamily env(config.master_seed, static_cast<std::uint64_t>(v),
                             static_cast<std::uint64_t>(run));
      services.push_back(
          generate_service_matrix(config.channel, config.horizon, config.n_arms, env));
      if (topology.exogenous[static_cast<std::size_t>(v)])
        arrivals.push_back(generate_arrivals(config.arrivals, config.horizon, env,
                                             &services.back()));
      else
        arrivals.emplace_back();
    }

    const NetworkTrace policy_trace = simulate_network(
        topology, services, arrivals,
        [&](int) { return make_policy(config.policies.front(), config.n_arms, config.horizon); },
        config.master_seed, static_cast<std::uint64_t>(run));

    std::vector<std::pair<JointAssignment, NetworkTrace>> benchmarks;
    benchmarks.reserve(assignments.size());
    for (const JointAssignment& assignment : assignments)
      benchmarks.emplace_back(
          assignment, simulate_network(
                          topology, services, arrivals,
                          [&](int node) {
                            return std::make_unique<FixedArmPolicy>(
                                config.n_arms, assignment.arms[static_cast<std::size_t>(node)]);
                          },
                          config.master_seed, static_cast<std::uint64_t>(run)));

    NetworkRunReport report;
    report.run = run;
    report.regret = network_regret(policy_trace, benchmarks);
    report.best.peak_queue = std::numeric_limits<double>::infinity();
    for (const auto& [assignment, trace] : benchmarks) {
      double peak = 0.0;
      for (const QueueTrace& queue : trace.queues) peak = std::max(peak, queue.lengths.maxCoeff());
      if (peak < report.best.peak_queue) {
        report.best.peak_queue = peak;
        report.best.assignment = assignment;
      }
    }
    reports.push_back(std::move(report));
  }
  return reports;
}

void emit_network_csv(const NetworkTopology& topology, const std::vector<NetworkRunReport>& reports,
                      std::ostream& out) {
  out << "run,metric,node,value,assignment\n";
  for (const NetworkRunReport& report : reports) {
    out << report.run << ",network_regret,"
        << topology.nodes[static_cast<std::size_t>(report.regret.argmax_node)] << ','
        << format_real(report.regret.value) << ",\n";
    for (int v = 0; v < topology.size(); ++v)
      out << report.run << ",node_regret," << topology.nodes[static_cast<std::size_t>(v)] << ','
          << format_real(report.regret.per_node(v)) << ",\n";
    std::string joined;
    for (std::size_t v = 0; v < report.best.assignment.arms.size(); ++v) {
      if (v > 0) joined += '|';
      joined += std::to_string(report.best.assignment.arms[v]);
    }
    out << report.run << ",best_peak_queue,," << format_real(report.best.peak_queue) << ','
        << joined << '\n';
  }
}

}  // namespace qsched
