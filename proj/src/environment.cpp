#include "qsched/environment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace qsched {

namespace {

void warn(const std::string& message) { std::cerr << "warning: " << message << "\n"; }

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_real(const std::string& field, const std::string& path, long line_no) {
  std::size_t consumed = 0;
  double value = 0.0;
  try {
    value = std::stod(field, &consumed);
  } catch (const std::exception&) {
    throw std::runtime_error(path + ": line " + std::to_string(line_no) + ": bad number '" +
                             field + "'");
  }
  if (consumed != field.size())
    throw std::runtime_error(path + ": line " + std::to_string(line_no) + ": bad number '" +
                             field + "'");
  return value;
}

}  // namespace

ChannelModel ChannelModel::block_markov(int num_blocks, std::optional<double> initial_rate) {
  if (num_blocks < 1) throw std::invalid_argument("ChannelModel: num_blocks must be positive");
  if (initial_rate && !(*initial_rate >= 0.0 && *initial_rate <= 1.0))
    throw std::invalid_argument("ChannelModel: initial_rate outside [0,1]");
  ChannelModel model;
  model.kind = Kind::BlockMarkov;
  model.num_blocks = num_blocks;
  model.initial_rate = initial_rate;
  return model;
}

ChannelModel ChannelModel::iid_uniform() {
  ChannelModel model;
  model.kind = Kind::IidUniform;
  return model;
}

ChannelModel ChannelModel::trace(std::string path) {
  ChannelModel model;
  model.kind = Kind::Trace;
  model.trace_path = std::move(path);
  return model;
}

ArrivalModel ArrivalModel::uniform_rate(std::optional<double> lambda, double epsilon) {
  if (lambda && !(*lambda >= 0.0)) throw std::invalid_argument("ArrivalModel: lambda must be >= 0");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("ArrivalModel: epsilon must be >= 0");
  ArrivalModel model;
  model.kind = Kind::UniformRate;
  model.lambda = lambda;
  model.epsilon = epsilon;
  return model;
}

ArrivalModel ArrivalModel::constant(double value) {
  if (!(value >= 1.0)) throw std::invalid_argument("ArrivalModel: constant value must be >= 1");
  ArrivalModel model;
  model.kind = Kind::Constant;
  model.constant_value = value;
  return model;
}

ArrivalModel ArrivalModel::trace(std::string path) {
  ArrivalModel model;
  model.kind = Kind::Trace;
  model.trace_path = std::move(path);
  return model;
}

double block_markov_step(double rate, double alpha, double zeta) {
  if (!(rate >= 0.0 && rate <= 1.0))
    throw std::invalid_argument("block_markov_step: rate outside [0,1]");
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw std::invalid_argument("block_markov_step: alpha outside [0,1]");
  if (!(zeta >= -1.0 && zeta <= 1.0))
    throw std::invalid_argument("block_markov_step: zeta outside [-1,1]");
  return std::clamp(alpha * rate + zeta, 0.0, 1.0);
}

std::vector<long> block_starts(long horizon, int num_blocks) {
  if (horizon < 1) throw std::invalid_argument("block_starts: horizon must be positive");
  if (num_blocks < 1) throw std::invalid_argument("block_starts: num_blocks must be positive");
  std::vector<long> starts(num_blocks);
  for (int k = 0; k < num_blocks; ++k)
    starts[k] = (static_cast<long>(k) * horizon + num_blocks - 1) / num_blocks;
  return starts;
}

Eigen::MatrixXd generate_service_matrix(const ChannelModel& model, long horizon, int n_channels,
                                        const StreamFamily& streams) {
  if (horizon < 1) throw std::invalid_argument("generate_service_matrix: horizon must be positive");
  if (n_channels < 1)
    throw std::invalid_argument("generate_service_matrix: n_channels must be positive");

  switch (model.kind) {
    case ChannelModel::Kind::IidUniform: {
      Eigen::MatrixXd services(horizon, n_channels);
      for (int i = 0; i < n_channels; ++i) {
        RngStream stream = streams.stream(StreamPurpose::Channels, static_cast<std::uint64_t>(i));
        for (long t = 0; t < horizon; ++t) services(t, i) = stream.next_double();
      }
      return services;
    }
    case ChannelModel::Kind::BlockMarkov: {
      if (model.num_blocks < 1)
        throw std::invalid_argument("generate_service_matrix: num_blocks must be positive");
      const std::vector<long> starts = block_starts(horizon, model.num_blocks);
      Eigen::MatrixXd services(horizon, n_channels);
      for (int i = 0; i < n_channels; ++i) {
        RngStream stream = streams.stream(StreamPurpose::Channels, static_cast<std::uint64_t>(i));
        double rate = model.initial_rate ? *model.initial_rate : stream.next_double();
        double alpha = 0.0;
        std::size_t next_block = 0;
        for (long t = 0; t < horizon; ++t) {
          // Every block draws its own alpha, including blocks the ceil
          // partition leaves empty, so the draw count depends only on m.
          while (next_block < starts.size() && starts[next_block] == t) {
            alpha = stream.next_double();
            ++next_block;
          }
          services(t, i) = rate;
          if (t + 1 < horizon) rate = block_markov_step(rate, alpha, stream.next_double(-1.0, 1.0));
        }
      }
      return services;
    }
    case ChannelModel::Kind::Trace: {
      Eigen::MatrixXd services = read_service_trace(model.trace_path);
      if (services.rows() != horizon || services.cols() != n_channels)
        throw std::runtime_error(model.trace_path + ": trace is " +
                                 std::to_string(services.rows()) + "x" +
                                 std::to_string(services.cols()) + ", expected " +
                                 std::to_string(horizon) + "x" + std::to_string(n_channels));
      return services;
    }
  }
  throw std::logic_error("generate_service_matrix: unknown channel model");
}

Eigen::VectorXd generate_arrivals(const ArrivalModel& model, long horizon,
                                  const StreamFamily& streams, const Eigen::MatrixXd* services) {
  if (horizon < 1) throw std::invalid_argument("generate_arrivals: horizon must be positive");

  switch (model.kind) {
    case ArrivalModel::Kind::UniformRate: {
      double lambda = 0.0;
      if (model.lambda) {
        lambda = *model.lambda;
      } else {
        if (services == nullptr)
          throw std::invalid_argument(
              "generate_arrivals: rate-rule lambda needs the service matrix");
        lambda = services->colwise().mean().maxCoeff() - model.epsilon;
        if (lambda < 0.0) {
          warn("derived arrival rate " + std::to_string(lambda) + " clamped to 0");
          lambda = 0.0;
        }
      }
      RngStream stream = streams.stream(StreamPurpose::Arrivals);
      Eigen::VectorXd arrivals(horizon);
      for (long t = 0; t < horizon; ++t) arrivals(t) = stream.next_double(0.0, 2.0 * lambda);
      return arrivals;
    }
    case ArrivalModel::Kind::Constant: {
      if (!(model.constant_value >= 1.0))
        throw std::invalid_argument("generate_arrivals: constant value must be >= 1");
      return Eigen::VectorXd::Constant(horizon, model.constant_value);
    }
    case ArrivalModel::Kind::Trace: {
      Eigen::VectorXd arrivals = read_arrival_trace(model.trace_path);
      if (arrivals.size() != horizon)
        throw std::runtime_error(model.trace_path + ": trace has " +
                                 std::to_string(arrivals.size()) + " slots, expected " +
                                 std::to_string(horizon));
      return arrivals;
    }
  }
  throw std::logic_error("generate_arrivals: unknown arrival model");
}

Eigen::MatrixXd read_service_trace(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error(path + ": cannot open service trace");

  std::string line;
  if (!std::getline(file, line)) throw std::runtime_error(path + ": empty service trace");
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "t")
    throw std::runtime_error(path + ": service trace header must be t,s1,...,sN");
  for (std::size_t i = 1; i < header.size(); ++i)
    if (header[i] != "s" + std::to_string(i))
      throw std::runtime_error(path + ": service trace header must be t,s1,...,sN");
  const std::size_t n_channels = header.size() - 1;

  std::vector<std::vector<double>> rows;
  long line_no = 1;
  while (std::getline(file, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw std::runtime_error(path + ": line " + std::to_string(line_no) + ": expected " +
                               std::to_string(header.size()) + " fields, got " +
                               std::to_string(fields.size()));
    std::vector<double> row(n_channels);
    for (std::size_t i = 0; i < n_channels; ++i) {
      row[i] = parse_real(fields[i + 1], path, line_no);
      if (!(row[i] >= 0.0 && row[i] <= 1.0))
        throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                                 ": rate outside [0,1]");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path + ": service trace has no data rows");

  Eigen::MatrixXd services(static_cast<long>(rows.size()), static_cast<long>(n_channels));
  for (std::size_t t = 0; t < rows.size(); ++t)
    for (std::size_t i = 0; i < n_channels; ++i)
      services(static_cast<long>(t), static_cast<long>(i)) = rows[t][i];
  return services;
}

Eigen::VectorXd read_arrival_trace(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error(path + ": cannot open arrival trace");

  std::string line;
  if (!std::getline(file, line)) throw std::runtime_error(path + ": empty arrival trace");
  if (split_csv_line(line) != std::vector<std::string>{"t", "a"})
    throw std::runtime_error(path + ": arrival trace header must be t,a");

  std::vector<double> values;
  long line_no = 1;
  while (std::getline(file, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != 2)
      throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                               ": expected 2 fields");
    const double value = parse_real(fields[1], path, line_no);
    if (!(value >= 0.0))
      throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                               ": negative arrival");
    values.push_back(value);
  }
  if (values.empty()) throw std::runtime_error(path + ": arrival trace has no data rows");

  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<long>(values.size()));
}

}  // namespace qsched
