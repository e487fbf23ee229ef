#include "qsched/experiment.hpp"
#include "qsched/oracles.hpp"
#include "qsched/simplex.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>

namespace {

using qsched::ExperimentConfig;

void apply_seed_override(ExperimentConfig& config) {
  const char* raw = std::getenv("QSCHED_MASTER_SEED");
  if (raw == nullptr) return;
  std::uint64_t seed = 0;
  const std::string text(raw);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw std::runtime_error("QSCHED_MASTER_SEED must be a nonnegative integer, got '" + text +
                             "'");
  config.master_seed = seed;
}

ExperimentConfig prepare_config(const std::string& path, int scale) {
  ExperimentConfig config = qsched::load_config(path);
  apply_seed_override(config);
  if (scale > 1) qsched::apply_scale(config, scale);
  return config;
}

// Empty directory means stdout; otherwise the named file inside it.
void with_output(const std::string& out_dir, const std::string& file_name,
                 const std::function<void(std::ostream&)>& write) {
  if (out_dir.empty()) {
    write(std::cout);
    return;
  }
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path path = std::filesystem::path(out_dir) / file_name;
  std::ofstream file(path);
  if (!file) throw std::runtime_error(path.string() + ": cannot open for writing");
  write(file);
  if (!file) throw std::runtime_error(path.string() + ": write failed");
  std::cerr << "wrote " << path.string() << '\n';
}

void check_lindley_oracle(long trials, std::uint64_t seed) {
  double worst = 0.0;
  for (long trial = 0; trial < trials; ++trial) {
    qsched::RngStream rng(seed, {qsched::StreamPurpose::Audit, 0, 0,
                                 static_cast<std::uint64_t>(trial)});
    const long horizon = 1 + rng.next_index(200);
    Eigen::VectorXd increments(horizon), arrivals(horizon), services(horizon);
    for (long t = 0; t < horizon; ++t) {
      increments(t) = rng.next_double(-2.0, 2.0);
      arrivals(t) = std::max(increments(t), 0.0);
      services(t) = std::max(-increments(t), 0.0);
    }
    const Eigen::VectorXd fold = qsched::queue_closed_form(increments);
    const Eigen::VectorXd direct = qsched::oracles::queue_suffix_max(increments);
    const qsched::QueueTrace trace = qsched::queue_trajectory(arrivals, services);
    worst = std::max(worst, (fold - direct).cwiseAbs().maxCoeff());
    if (trace.lengths.tail(horizon) != fold)
      throw std::runtime_error("lindley oracle: trajectory and fold disagree on trial " +
                               std::to_string(trial));
  }
  if (worst > 1e-9)
    throw std::runtime_error("lindley oracle: deviation " + std::to_string(worst) +
                             " exceeds 1e-9");
  std::cout << "oracle lindley: " << trials << " trials, max deviation " << worst << ", ok\n";
}

void check_interval_oracle(long trials, std::uint64_t seed) {
  for (long trial = 0; trial < trials; ++trial) {
    qsched::RngStream rng(seed, {qsched::StreamPurpose::Audit, 0, 1,
                                 static_cast<std::uint64_t>(trial)});
    const int n_arms = 1 + rng.next_index(4);
    const long horizon = 1 + rng.next_index(64);
    Eigen::MatrixXd services(horizon, n_arms);
    qsched::ScheduleTrace trace;
    trace.arms.resize(static_cast<std::size_t>(horizon));
    trace.observed_gains.resize(horizon);
    for (long t = 0; t < horizon; ++t) {
      for (int i = 0; i < n_arms; ++i) services(t, i) = rng.next_double();
      const int arm = rng.next_index(n_arms);
      trace.arms[static_cast<std::size_t>(t)] = arm;
      trace.observed_gains(t) = services(t, arm);
    }
    const qsched::IntervalRegretReport fast = qsched::max_interval_regret(services, trace);
    const qsched::IntervalRegretReport slow =
        qsched::oracles::max_interval_regret_bruteforce(services, trace);
    if (fast.max_regret != slow.max_regret || fast.start != slow.start || fast.end != slow.end ||
        fast.best_arm != slow.best_arm || fast.per_prefix != slow.per_prefix)
      throw std::runtime_error("interval oracle: scan and enumeration disagree on trial " +
                               std::to_string(trial));
  }
  std::cout << "oracle interval: " << trials << " trials, scan matches enumeration exactly, ok\n";
}

void check_projection_oracle(long trials, std::uint64_t seed) {
  constexpr double kStep = 1e-3;
  double worst = 0.0;
  for (long trial = 0; trial < trials; ++trial) {
    qsched::RngStream rng(seed, {qsched::StreamPurpose::Audit, 0, 2,
                                 static_cast<std::uint64_t>(trial)});
    const int n = 1 + rng.next_index(3);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = rng.next_double(-3.0, 3.0);
    const qsched::ProbabilityVector projected = qsched::project_to_simplex(v);
    const Eigen::VectorXd gridded = qsched::oracles::project_grid_search(v, kStep);
    const double gap = (projected.weights() - v).norm() - (gridded - v).norm();
    worst = std::max(worst, gap);
  }
  // The grid point can only be farther from v than the true projection.
  if (worst > 1e-9)
    throw std::runtime_error("projection oracle: projection beaten by grid by " +
                             std::to_string(worst));
  std::cout << "oracle projection: " << trials << " trials, max distance gap " << worst
            << ", ok\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Queue scheduling over arbitrarily varying channels"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int scale = 1;
  int jobs = 1;

  CLI::App* simulate = app.add_subcommand("simulate", "Run the configured experiment and emit "
                                                      "mean regret curves as CSV");
  simulate->add_option("--config", config_path, "Experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  simulate->add_option("--scale", scale, "Divide horizon and run count by this factor")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--out", out_dir, "Output directory (default: stdout)");
  simulate->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  CLI::App* audit = app.add_subcommand("audit", "Per-run interval regret, domination, and bound "
                                                "verdicts as CSV");
  audit->add_option("--config", config_path, "Experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  audit->add_option("--scale", scale, "Divide horizon and run count by this factor")
      ->check(CLI::PositiveNumber);
  audit->add_option("--out", out_dir, "Output directory (default: stdout)");
  audit->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  CLI::App* network = app.add_subcommand("network", "Run the configured topology against the "
                                                    "exhaustive joint-assignment benchmark");
  network->add_option("--config", config_path, "Experiment config (JSON) naming a topology")
      ->required()
      ->check(CLI::ExistingFile);
  network->add_option("--scale", scale, "Divide horizon and run count by this factor")
      ->check(CLI::PositiveNumber);
  network->add_option("--out", out_dir, "Output directory (default: stdout)");

  std::string check;
  long trials = 500;
  std::uint64_t oracle_seed = 7;
  CLI::App* oracle = app.add_subcommand("oracle", "Cross-check a fast path against its "
                                                  "brute-force oracle");
  oracle->add_option("--check", check, "Which oracle to run")
      ->required()
      ->check(CLI::IsMember({"lindley", "interval", "projection"}));
  oracle->add_option("--trials", trials, "Random instances to draw")->check(CLI::PositiveNumber);
  oracle->add_option("--seed", oracle_seed, "Seed for the instance generator");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& error) {
    return app.exit(error);
  }

  try {
    if (app.got_subcommand(simulate)) {
      const ExperimentConfig config = prepare_config(config_path, scale);
      const qsched::AggregateResult result = qsched::run_many(config, jobs);
      with_output(out_dir, "curves.csv", [&](std::ostream& out) { qsched::emit_csv(result, out); });
    } else if (app.got_subcommand(audit)) {
      const ExperimentConfig config = prepare_config(config_path, scale);
      std::vector<qsched::AuditRow> rows;
      for (const qsched::RunResult& run : qsched::run_all(config, jobs)) {
        const std::vector<qsched::AuditRow> run_rows = qsched::audit_rows(run);
        rows.insert(rows.end(), run_rows.begin(), run_rows.end());
      }
      with_output(out_dir, "audit.csv",
                  [&](std::ostream& out) { qsched::emit_audit_csv(rows, out); });
    } else if (app.got_subcommand(network)) {
      const ExperimentConfig config = prepare_config(config_path, scale);
      const qsched::NetworkTopology topology =
          qsched::NetworkTopology::from_csv(config.topology_path, config.n_arms);
      const std::vector<qsched::NetworkRunReport> reports = qsched::run_network(config);
      with_output(out_dir, "network.csv",
                  [&](std::ostream& out) { qsched::emit_network_csv(topology, reports, out); });
    } else if (app.got_subcommand(oracle)) {
      if (check == "lindley") check_lindley_oracle(trials, oracle_seed);
      if (check == "interval") check_interval_oracle(trials, oracle_seed);
      if (check == "projection") check_projection_oracle(trials, oracle_seed);
    }
  } catch (const std::exception& error) {
    std::cerr << nlohmann::json{{"error", error.what()}}.dump() << '\n';
    return 1;
  }
  return 0;
}
