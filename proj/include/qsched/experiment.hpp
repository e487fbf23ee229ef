#pragma once

#include "qsched/environment.hpp"
#include "qsched/network.hpp"
#include "qsched/queue.hpp"
#include "qsched/regret.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace qsched {

struct AuditOptions {
  bool interval_regret = true;
  bool domination = true;
  bool theorem_bounds = true;
  double delta = 0.1;  // confidence parameter fed to theorem2_bound
};

struct ExperimentConfig {
  int schema_version = 1;
  int n_arms = 2;
  long horizon = 100;
  ChannelModel channel;
  ArrivalModel arrivals;
  std::vector<std::string> policies;
  int num_runs = 1;
  std::uint64_t master_seed = 0;
  AuditOptions audit;
  std::string topology_path;  // empty = single queue
};

// JSON with a versioned schema; unknown schema versions and malformed fields
// are rejected with messages naming the offending key.
ExperimentConfig parse_config(const std::string& json_text, const std::string& origin);
ExperimentConfig load_config(const std::string& path);

// Desk-scale shrink: divides horizon and num_runs by factor, clamping at 1.
void apply_scale(ExperimentConfig& config, int factor);

struct PolicyRunOutcome {
  std::string policy;
  Eigen::VectorXd regret_curve;  // running queue regret, length T
  QueueRegret queue_regret;      // final value with its argmax slot and arm
  ScheduleTrace schedule;
  std::optional<IntervalRegretReport> interval;  // realized accounting
  std::optional<bool> domination_ok;
  std::optional<double> theorem2;  // bound value, wamab only
  std::optional<bool> theorem2_ok;
};

struct RunResult {
  int run_index = 0;  // 1-based
  std::vector<PolicyRunOutcome> policies;
  double wall_seconds = 0.0;
};

// One environment draw (run_index keys the streams) with every listed policy
// and all N fixed-arm benchmarks simulated on it.
RunResult run_single(const ExperimentConfig& config, int run_index);

struct AggregateResult {
  long horizon = 0;
  int num_runs = 0;
  std::vector<std::string> policies;
  Eigen::MatrixXd mean;   // T x P
  Eigen::MatrixXd sem;    // T x P, standard error of the mean (0 when num_runs = 1)
};

// Runs 1..num_runs, optionally across threads. Accumulation happens in run
// order, so the result is byte-identical at every parallelism level.
AggregateResult run_many(const ExperimentConfig& config, int jobs = 1);

// As run_many but keeps every per-run result (for audits).
std::vector<RunResult> run_all(const ExperimentConfig& config, int jobs = 1);

// Schema "policy,t,mean_queue_regret,stderr,n_runs", slot-major rows, reals
// with 9 significant digits.
void emit_csv(const AggregateResult& result, std::ostream& out);

struct AuditRow {
  int run = 0;
  std::string metric;
  double value = 0.0;
  std::optional<int> interval_start;
  std::optional<int> interval_end;
  std::optional<int> arm;
};

std::vector<AuditRow> audit_rows(const RunResult& result);
// Schema "run,metric,value,interval_start,interval_end,arm".
void emit_audit_csv(const std::vector<AuditRow>& rows, std::ostream& out);

struct NetworkRunReport {
  int run = 0;
  NetworkRegret regret;        // against all joint assignments
  BestAssignment best;         // peak-queue minimizer
};

// Runs the topology named by the config with policies[0] at every node and
// benchmarks it against the exhaustive joint-assignment set.
std::vector<NetworkRunReport> run_network(const ExperimentConfig& config);
// Schema "run,metric,node,value,assignment".
void emit_network_csv(const NetworkTopology& topology, const std::vector<NetworkRunReport>& reports,
                      std::ostream& out);

}  // namespace qsched
