#pragma once

#include "qsched/rng.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace qsched {

struct ChannelModel {
  enum class Kind { BlockMarkov, IidUniform, Trace };

  Kind kind = Kind::IidUniform;
  int num_blocks = 1;                  // BlockMarkov
  std::optional<double> initial_rate;  // BlockMarkov; empty = Unif(0,1) per channel
  std::string trace_path;              // Trace

  static ChannelModel block_markov(int num_blocks,
                                   std::optional<double> initial_rate = std::nullopt);
  static ChannelModel iid_uniform();
  static ChannelModel trace(std::string path);
};

struct ArrivalModel {
  enum class Kind { UniformRate, Constant, Trace };

  Kind kind = Kind::UniformRate;
  std::optional<double> lambda;  // UniformRate; empty = derive from the service matrix
  double epsilon = 0.05;         // rate rule: lambda = max column mean - epsilon
  double constant_value = 1.0;   // Constant; must be >= 1
  std::string trace_path;

  static ArrivalModel uniform_rate(std::optional<double> lambda, double epsilon = 0.05);
  static ArrivalModel constant(double value);
  static ArrivalModel trace(std::string path);
};

// One transition of the per-channel recursion: clamp(alpha * rate + zeta, 0, 1).
double block_markov_step(double rate, double alpha, double zeta);

// 0-based first slots of each block; boundaries fall at ceil(k T / m).
std::vector<long> block_starts(long horizon, int num_blocks);

// T x N matrix of rates in [0,1]. Channel i consumes only the substream
// (Channels, node, run, i), so matrices are reproducible channel by channel.
Eigen::MatrixXd generate_service_matrix(const ChannelModel& model, long horizon, int n_channels,
                                        const StreamFamily& streams);

// Nonnegative length-T arrival sequence. The UniformRate model without an
// explicit lambda derives it from the service matrix, which must be passed.
Eigen::VectorXd generate_arrivals(const ArrivalModel& model, long horizon,
                                  const StreamFamily& streams,
                                  const Eigen::MatrixXd* services = nullptr);

// CSV traces: header "t,s1,...,sN" (rates in [0,1]) and "t,a" (nonnegative).
Eigen::MatrixXd read_service_trace(const std::string& path);
Eigen::VectorXd read_arrival_trace(const std::string& path);

}  // namespace qsched
