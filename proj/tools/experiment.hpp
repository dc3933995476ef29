#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "memlab/metrics.hpp"
#include "memlab/simulation.hpp"

namespace memlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

inline constexpr int kSummarySchemaVersion = 1;
inline constexpr int kExperimentSchemaVersion = 1;
inline constexpr const char* kOutputRootEnv = "MEMLAB_OUTPUT_ROOT";

// Parse or validation failure; the message is already anchored to a line
// ("file:line: message") when the position is known.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Variant {
  std::string name;
  SimulationConfig config;  // seed is overwritten per run
};

struct ExperimentFile {
  std::string name;
  std::vector<Variant> variants;
  std::vector<std::uint64_t> seeds;
  std::filesystem::path output_dir;
  std::size_t shift_clusters = 3;
  std::size_t min_retrievals = 5;  // for the deleted/retained split
};

ExperimentFile parse_experiment(const std::string& text, const std::string& source_name);
ExperimentFile load_experiment(const std::filesystem::path& path);

// Output directory after applying the MEMLAB_OUTPUT_ROOT override.
std::filesystem::path resolve_output_dir(const ExperimentFile& experiment);

inline constexpr const char* kTraceCsvHeader =
    "step,input_similarity,output_similarity,prediction,truth,abs_error,success,added,n_deleted,"
    "mem_size_after";

void write_trace_csv(std::ostream& out, const std::vector<StepTrace>& traces);
// Sidecar with one row per add/delete event: step,event,record_id.
void write_events_csv(std::ostream& out, const std::vector<StepTrace>& traces);

struct SummaryRecord {
  int schema_version = kSummarySchemaVersion;
  std::string experiment;
  std::string variant;
  std::uint64_t seed = 0;
  RunSummary summary;
  std::vector<BlockSuccess> blocks;  // shifted runs only
};

std::string summary_to_json(const SummaryRecord& record, const SimulationConfig& config);
SummaryRecord summary_from_json(const std::string& text);

struct ComparisonRow {
  std::string variant;
  std::size_t runs = 0;
  double mean_success = 0.0;
  double stddev_success = 0.0;
  double mean_mem_size = 0.0;
  double stddev_mem_size = 0.0;
};

// Groups by variant in first-seen order. Throws ConfigError on mixed schema
// versions.
std::vector<ComparisonRow> compare_summaries(const std::vector<SummaryRecord>& records);
std::string render_comparison(const std::vector<ComparisonRow>& rows);

struct RunReport {
  std::vector<std::filesystem::path> files;
  std::vector<ComparisonRow> rows;
};

// Runs every variant x seed, writing <variant>__seed<k>.{csv,events.csv,json}
// and comparison.txt. Files written before a failure are removed.
RunReport run_experiment(const ExperimentFile& experiment, unsigned workers = 0);
// Same grid on cluster-reordered streams; summaries also carry per-block
// success rates, and blocks.txt lists them.
RunReport run_shift_experiment(const ExperimentFile& experiment, unsigned workers = 0);

struct AdapterCheck {
  bool ok = false;
  std::string request;
  std::string response;
  double guess = 0.0;
  std::string error;
};

AdapterCheck check_adapter(const std::string& command, std::chrono::milliseconds timeout);

}  // namespace memlab::cli
