#include "qsched/network.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace qsched {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

int NetworkTopology::index_of(const std::string& name) const {
  for (int v = 0; v < size(); ++v)
    if (nodes[static_cast<std::size_t>(v)] == name) return v;
  throw std::invalid_argument("topology: unknown node '" + name + "'");
}

void NetworkTopology::validate() const {
  const int n = size();
  if (n < 1) throw std::invalid_argument("topology: no nodes");
  if (channels_per_node < 1) throw std::invalid_argument("topology: channels_per_node must be positive");
  if (next_hop.size() != nodes.size() || exogenous.size() != nodes.size())
    throw std::invalid_argument("topology: field length mismatch");
  for (int v = 0; v < n; ++v) {
    const int hop = next_hop[static_cast<std::size_t>(v)];
    if (hop < -1 || hop >= n)
      throw std::invalid_argument("topology: node '" + nodes[static_cast<std::size_t>(v)] +
                                  "' has a dangling next hop");
    // Follow the route; more than n hops means a cycle.
    int current = v;
    for (int steps = 0; current != -1; ++steps) {
      if (steps > n)
        throw std::invalid_argument("topology: cycle reachable from node '" +
                                    nodes[static_cast<std::size_t>(v)] + "'");
      current = next_hop[static_cast<std::size_t>(current)];
    }
  }
}

NetworkTopology NetworkTopology::from_csv(const std::string& path, int channels_per_node) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error(path + ": cannot open topology");

  std::string line;
  if (!std::getline(file, line)) throw std::runtime_error(path + ": empty topology");
  if (split_csv_line(line) != std::vector<std::string>{"node", "next_hop", "exogenous"})
    throw std::runtime_error(path + ": topology header must be node,next_hop,exogenous");

  NetworkTopology topology;
  topology.channels_per_node = channels_per_node;
  std::vector<std::string> hop_names;
  long line_no = 1;
  while (std::getline(file, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != 3)
      throw std::runtime_error(path + ": line " + std::to_string(line_no) + ": expected 3 fields");
    if (fields[0].empty())
      throw std::runtime_error(path + ": line " + std::to_string(line_no) + ": empty node name");
    if (fields[2] != "0" && fields[2] != "1")
      throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                               ": exogenous must be 0 or 1");
    topology.nodes.push_back(fields[0]);
    hop_names.push_back(fields[1]);
    topology.exogenous.push_back(fields[2] == "1");
  }
  if (topology.nodes.empty()) throw std::runtime_error(path + ": topology has no nodes");

  std::unordered_map<std::string, int> index;
  for (int v = 0; v < topology.size(); ++v) {
    if (!index.emplace(topology.nodes[static_cast<std::size_t>(v)], v).second)
      throw std::runtime_error(path + ": duplicate node '" +
                               topology.nodes[static_cast<std::size_t>(v)] + "'");
  }
  for (const std::string& hop : hop_names) {
    if (hop.empty() || hop == "sink") {
      topology.next_hop.push_back(-1);
    } else {
      const auto it = index.find(hop);
      if (it == index.end()) throw std::runtime_error(path + ": unknown next hop '" + hop + "'");
      topology.next_hop.push_back(it->second);
    }
  }
  topology.validate();
  return topology;
}

NetworkTrace simulate_network(const NetworkTopology& topology,
                              const std::vector<Eigen::MatrixXd>& per_node_services,
                              const std::vector<Eigen::VectorXd>& exogenous_arrivals,
                              const std::function<std::unique_ptr<Policy>(int node)>& make_node_policy,
                              std::uint64_t master_seed, std::uint64_t run) {
  topology.validate();
  const int n_nodes = topology.size();
  if (static_cast<int>(per_node_services.size()) != n_nodes)
    throw std::invalid_argument("simulate_network: one service matrix per node required");
  if (static_cast<int>(exogenous_arrivals.size()) != n_nodes)
    throw std::invalid_argument("simulate_network: one arrival vector per node required");

  const long horizon = per_node_services[0].rows();
  for (int v = 0; v < n_nodes; ++v) {
    const Eigen::MatrixXd& services = per_node_services[static_cast<std::size_t>(v)];
    if (services.rows() != horizon)
      throw std::invalid_argument("simulate_network: service horizon mismatch at node " +
                                  topology.nodes[static_cast<std::size_t>(v)]);
    if (services.cols() != topology.channels_per_node)
      throw std::invalid_argument("simulate_network: channel count mismatch at node " +
                                  topology.nodes[static_cast<std::size_t>(v)]);
    const Eigen::VectorXd& exo = exogenous_arrivals[static_cast<std::size_t>(v)];
    if (topology.exogenous[static_cast<std::size_t>(v)]) {
      if (exo.size() != horizon)
        throw std::invalid_argument("simulate_network: arrival horizon mismatch at node " +
                                    topology.nodes[static_cast<std::size_t>(v)]);
    } else if (exo.size() != 0 && (exo.size() != horizon || exo.cwiseAbs().maxCoeff() != 0.0)) {
      throw std::invalid_argument("simulate_network: non-exogenous node " +
                                  topology.nodes[static_cast<std::size_t>(v)] +
                                  " must have no arrivals");
    }
  }
  if (horizon < 1) throw std::invalid_argument("simulate_network: empty horizon");

  std::vector<std::unique_ptr<Policy>> policies;
  std::vector<RngStream> streams;
  policies.reserve(static_cast<std::size_t>(n_nodes));
  streams.reserve(static_cast<std::size_t>(n_nodes));
  for (int v = 0; v < n_nodes; ++v) {
    policies.push_back(make_node_policy(v));
    streams.emplace_back(master_seed,
                         StreamId{StreamPurpose::Policy, static_cast<std::uint64_t>(v), run, 0});
  }

  NetworkTrace trace;
  trace.queues.resize(static_cast<std::size_t>(n_nodes));
  trace.schedules.resize(static_cast<std::size_t>(n_nodes));
  trace.arrivals.assign(static_cast<std::size_t>(n_nodes), Eigen::VectorXd::Zero(horizon));
  for (int v = 0; v < n_nodes; ++v) {
    QueueTrace& queue = trace.queues[static_cast<std::size_t>(v)];
    queue.lengths = Eigen::VectorXd::Zero(horizon + 1);
    queue.departures = Eigen::VectorXd::Zero(horizon);
    ScheduleTrace& schedule = trace.schedules[static_cast<std::size_t>(v)];
    schedule.arms.resize(static_cast<std::size_t>(horizon));
    schedule.observed_gains.resize(horizon);
  }

  for (long t = 0; t < horizon; ++t) {
    for (int v = 0; v < n_nodes; ++v) {
      const std::size_t vi = static_cast<std::size_t>(v);
      double arrival = 0.0;
      if (topology.exogenous[vi]) arrival += exogenous_arrivals[vi](t);
      // One-slot forwarding delay: collect what upstream nodes sent at t-1.
      if (t > 0)
        for (int u = 0; u < n_nodes; ++u)
          if (topology.next_hop[static_cast<std::size_t>(u)] == v)
            arrival += trace.queues[static_cast<std::size_t>(u)].departures(t - 1);
      trace.arrivals[vi](t) = arrival;

      const int arm = policies[vi]->select(streams[vi]);
      const double rate = per_node_services[vi](t, arm);
      const LindleyStep step = lindley_step(trace.queues[vi].lengths(t), arrival, rate);
      trace.queues[vi].lengths(t + 1) = step.next_length;
      trace.queues[vi].departures(t) = step.departed;
      trace.schedules[vi].arms[static_cast<std::size_t>(t)] = arm;
      trace.schedules[vi].observed_gains(t) = rate;
      // The chosen channel's rate is always observable, whether or not
      // traffic crossed it.
      policies[vi]->feed(arm, rate);
    }
  }
  return trace;
}

std::vector<JointAssignment> enumerate_joint_assignments(int n_arms, int n_nodes) {
  if (n_arms < 1 || n_nodes < 1)
    throw std::invalid_argument("enumerate_joint_assignments: empty enumeration");
  double count = 1.0;
  for (int v = 0; v < n_nodes; ++v) count *= n_arms;
  if (count > 1e6)
    throw std::runtime_error("enumerate_joint_assignments: " + std::to_string(n_arms) + "^" +
                             std::to_string(n_nodes) +
                             " joint assignments exceed 1e6; sample a subset instead");

  std::vector<JointAssignment> all;
  all.reserve(static_cast<std::size_t>(count));
  JointAssignment current;
  current.arms.assign(static_cast<std::size_t>(n_nodes), 0);
  while (true) {
    all.push_back(current);
    // Lexicographic odometer, node 0 most significant.
    int v = n_nodes - 1;
    while (v >= 0 && ++current.arms[static_cast<std::size_t>(v)] == n_arms) {
      current.arms[static_cast<std::size_t>(v)] = 0;
      --v;
    }
    if (v < 0) break;
  }
  return all;
}

NetworkRegret network_regret(const NetworkTrace& policy_trace,
                             const std::vector<std::pair<JointAssignment, NetworkTrace>>& benchmarks) {
  if (benchmarks.empty()) throw std::invalid_argument("network_regret: no benchmarks");
  const std::size_t n_nodes = policy_trace.queues.size();
  for (const auto& [assignment, trace] : benchmarks) {
    if (trace.queues.size() != n_nodes)
      throw std::invalid_argument("network_regret: benchmark node count mismatch");
    (void)assignment;
  }

  NetworkRegret result;
  result.per_node.resize(static_cast<long>(n_nodes));
  result.value = -std::numeric_limits<double>::infinity();
  for (std::size_t v = 0; v < n_nodes; ++v) {
    const Eigen::VectorXd& policy_lengths = policy_trace.queues[v].lengths;
    double node_regret = -std::numeric_limits<double>::infinity();
    for (long t = 1; t < policy_lengths.size(); ++t) {
      double best_benchmark = std::numeric_limits<double>::infinity();
      for (const auto& [assignment, trace] : benchmarks) {
        (void)assignment;
        best_benchmark = std::min(best_benchmark, trace.queues[v].lengths(t));
      }
      node_regret = std::max(node_regret, policy_lengths(t) - best_benchmark);
    }
    result.per_node(static_cast<long>(v)) = node_regret;
    if (node_regret > result.value) {
      result.value = node_regret;
      result.argmax_node = static_cast<int>(v);
    }
  }
  return result;
}

BestAssignment best_joint_assignment(const NetworkTopology& topology,
                                     const std::vector<Eigen::MatrixXd>& per_node_services,
                                     const std::vector<Eigen::VectorXd>& exogenous_arrivals) {
  const std::vector<JointAssignment> all =
      enumerate_joint_assignments(topology.channels_per_node, topology.size());

  BestAssignment best;
  best.peak_queue = std::numeric_limits<double>::infinity();
  for (const JointAssignment& assignment : all) {
    const NetworkTrace trace = simulate_network(
        topology, per_node_services, exogenous_arrivals,
        [&](int node) {
          return std::make_unique<FixedArmPolicy>(topology.channels_per_node,
                                                  assignment.arms[static_cast<std::size_t>(node)]);
        },
        0, 0);
    double peak = 0.0;
    for (const QueueTrace& queue : trace.queues) peak = std::max(peak, queue.lengths.maxCoeff());
    // Strict improvement keeps the lexicographically first assignment on ties.
    if (peak < best.peak_queue) {
      best.peak_queue = peak;
      best.assignment = assignment;
    }
  }
  return best;
}

}  // namespace qsched
