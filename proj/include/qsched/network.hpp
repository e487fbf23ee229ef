#pragma once

#include "qsched/policy.hpp"
#include "qsched/queue.hpp"
#include "qsched/regret.hpp"
#include "qsched/rng.hpp"

#include <Eigen/Core>

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace qsched {

// Directed forest of queues: every node forwards to exactly one next hop or
// leaves the system (next_hop = -1). Each node runs its own scheduler over
// channels_per_node channels.
struct NetworkTopology {
  std::vector<std::string> nodes;
  std::vector<int> next_hop;  // index into nodes, -1 = sink
  std::vector<bool> exogenous;
  int channels_per_node = 1;

  int size() const { return static_cast<int>(nodes.size()); }
  int index_of(const std::string& name) const;

  // Rejects dangling hops, self-loops, and cycles (every node must reach a sink).
  void validate() const;

  // CSV with header "node,next_hop,exogenous"; next_hop empty or "sink" ends
  // the route, exogenous is 0 or 1.
  static NetworkTopology from_csv(const std::string& path, int channels_per_node);
};

struct NetworkTrace {
  std::vector<QueueTrace> queues;          // per node
  std::vector<ScheduleTrace> schedules;    // per node
  std::vector<Eigen::VectorXd> arrivals;   // per node, exogenous plus forwarded
};

// Slot-synchronous simulation with one-slot forwarding delay: what node u
// sends in slot t arrives at next_hop(u) in slot t+1. Node v's policy draws
// from the substream (Policy, node=v, run, 0), so a single-node topology
// reproduces the single-queue pipeline bit for bit.
NetworkTrace simulate_network(const NetworkTopology& topology,
                              const std::vector<Eigen::MatrixXd>& per_node_services,
                              const std::vector<Eigen::VectorXd>& exogenous_arrivals,
                              const std::function<std::unique_ptr<Policy>(int node)>& make_node_policy,
                              std::uint64_t master_seed, std::uint64_t run);

struct JointAssignment {
  std::vector<int> arms;  // one fixed arm per node
};

// All N^|V| joint assignments in lexicographic order (node 0 most significant).
// Refuses to enumerate more than 1e6 combinations.
std::vector<JointAssignment> enumerate_joint_assignments(int n_arms, int n_nodes);

struct NetworkRegret {
  double value = 0.0;              // max over nodes of the per-node regret
  int argmax_node = 0;
  Eigen::VectorXd per_node;        // R_{Q,v} = max_t max_a (Q_v(t) - Q^a_v(t))
};

// Per-node worst-case gap against a set of fixed joint assignments, then the
// max across nodes.
NetworkRegret network_regret(const NetworkTrace& policy_trace,
                             const std::vector<std::pair<JointAssignment, NetworkTrace>>& benchmarks);

struct BestAssignment {
  JointAssignment assignment;
  double peak_queue = 0.0;  // max over nodes and slots under that assignment
};

// Exhaustive minimizer of the peak queue over joint fixed assignments; ties
// break lexicographically by node order then arm index.
BestAssignment best_joint_assignment(const NetworkTopology& topology,
                                     const std::vector<Eigen::MatrixXd>& per_node_services,
                                     const std::vector<Eigen::VectorXd>& exogenous_arrivals);

}  // namespace qsched
