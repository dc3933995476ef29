#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "experiment.hpp"

namespace {

using namespace memlab::cli;

int cmd_run(const std::string& config, unsigned jobs, bool shifted) {
  ExperimentFile experiment;
  try {
    experiment = load_experiment(config);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  try {
    const auto report = shifted ? run_shift_experiment(experiment, jobs) : run_experiment(experiment, jobs);
    std::cout << render_comparison(report.rows);
    std::cout << "wrote " << report.files.size() << " files to " << resolve_output_dir(experiment).string()
              << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

int cmd_compare(const std::vector<std::string>& files) {
  std::vector<SummaryRecord> records;
  for (const auto& file : files) {
    std::ifstream in(file);
    if (!in) {
      std::cerr << "error: cannot read " << file << '\n';
      return kExitUsage;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    try {
      records.push_back(summary_from_json(buf.str()));
    } catch (const ConfigError& e) {
      std::cerr << "error: " << file << ": " << e.what() << '\n';
      return kExitUsage;
    }
  }
  try {
    std::cout << render_comparison(compare_summaries(records));
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitOk;
}

int cmd_adapter_check(const std::string& command, int timeout_ms) {
  const auto check = check_adapter(command, std::chrono::milliseconds(timeout_ms));
  std::cout << "request:  " << check.request << '\n';
  if (!check.ok) {
    std::cout << "FAIL: " << check.error << '\n';
    return kExitRuntime;
  }
  std::cout << "response: " << check.response << '\n' << "OK: guess = " << check.guess << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"memlab: memory addition/deletion experiments on a synthetic regression agent"};
  app.require_subcommand(1);

  std::string config;
  unsigned jobs = 0;
  auto* run = app.add_subcommand("run", "Run every variant x seed of an experiment file");
  run->add_option("config", config, "Experiment YAML file")->required();
  run->add_option("-j,--jobs", jobs, "Worker threads (0 = all cores)");

  auto* shift = app.add_subcommand("shift", "Run an experiment on cluster-reordered task streams");
  shift->add_option("config", config, "Experiment YAML file")->required();
  shift->add_option("-j,--jobs", jobs, "Worker threads (0 = all cores)");

  std::vector<std::string> summaries;
  auto* compare = app.add_subcommand("compare", "Tabulate summary JSON files by variant");
  compare->add_option("summaries", summaries, "Summary JSON files")->required();

  std::string command;
  int timeout_ms = 5000;
  auto* adapter = app.add_subcommand("adapter-check", "Smoke-test an external agent adapter");
  adapter->add_option("command", command, "Shell command that starts the adapter")->required();
  adapter->add_option("--timeout-ms", timeout_ms, "Response timeout")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (*run) return cmd_run(config, jobs, false);
  if (*shift) return cmd_run(config, jobs, true);
  if (*compare) return cmd_compare(summaries);
  if (*adapter) return cmd_adapter_check(command, timeout_ms);
  return kExitUsage;
}
