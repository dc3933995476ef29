#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "memlab/deletion.hpp"
#include "memlab/evaluators.hpp"
#include "memlab/memory_bank.hpp"
#include "memlab/regagent.hpp"

namespace memlab {

struct SimulationConfig {
  std::uint64_t seed = 0;
  std::size_t stream_length = 4000;
  std::size_t k_retrieve = 6;
  std::size_t initial_memory = 100;
  std::size_t dimension = 6;
  std::vector<double> means = kDefaultMeans;
  double noise_bound = 1.0;
  EvaluatorSpec addition = EvaluatorSpec::add_all();
  // Ledger utility is 1 when |prediction - truth| is within this.
  double utility_threshold = kSuccessTolerance;
  DeletionConfig deletion;
  SurrogateParams surrogate;
  // Store the labelled target instead of the agent's guess on accepted adds.
  bool error_free = false;
  double gamma_output = 1.0;
  // When set, an external process replaces the surrogate.
  std::optional<std::string> agent_command;
  std::chrono::milliseconds agent_timeout{5000};

  void validate() const;
};

struct StepTrace {
  std::int64_t step = 0;
  std::vector<RecordId> retrieved_ids;
  double input_similarity = 0.0;
  double output_similarity = 0.0;
  double prediction = 0.0;
  double truth = 0.0;
  double abs_error = 0.0;
  bool success = false;
  bool added = false;
  std::optional<RecordId> added_id;
  std::vector<RecordId> deleted_ids;
  std::size_t mem_size_after = 0;
};

// State of a record at the moment it was deleted.
struct DeletedRecord {
  MemoryRecord record;
  std::size_t retrieval_count = 0;
  std::optional<double> mean_utility;
  std::int64_t deleted_step = 0;
};

enum class SweepKind { periodic, history, combined, capacity };

// Reported before the victims are removed, with the bank as the sweep saw it.
struct SweepEvent {
  std::int64_t step = 0;
  SweepKind kind = SweepKind::periodic;
  std::int64_t t_prev = 0;
  const MemoryBank* bank = nullptr;
  std::vector<RecordId> victims;
};

using SweepObserver = std::function<void(const SweepEvent&)>;

// One seeded run. Each step: sample task, retrieve top-K, log retrievals,
// execute, evaluate, log utilities, add, run due sweeps, evict over capacity.
class Simulation {
 public:
  explicit Simulation(SimulationConfig config, std::unique_ptr<Agent> agent = nullptr);
  // Replays `tasks` in order instead of sampling them.
  Simulation(SimulationConfig config, std::vector<TaskInstance> tasks,
             std::unique_ptr<Agent> agent = nullptr);

  const StepTrace& step();
  bool finished() const noexcept { return steps_done_ >= length_; }
  void run();

  void set_sweep_observer(SweepObserver observer) { observer_ = std::move(observer); }

  const SimulationConfig& config() const noexcept { return config_; }
  const Environment& environment() const noexcept { return env_; }
  const MemoryBank& bank() const noexcept { return bank_; }
  const std::vector<StepTrace>& traces() const noexcept { return traces_; }
  const std::vector<DeletedRecord>& deletion_log() const noexcept { return deletion_log_; }
  std::size_t steps_done() const noexcept { return steps_done_; }
  // Retrievals ever logged, and those that left with deleted records.
  std::size_t retrievals_logged() const noexcept { return retrievals_logged_; }
  std::size_t deleted_retrievals() const noexcept { return deleted_retrievals_; }

 private:
  std::vector<RecordId> sweep(std::int64_t t, SweepKind kind, std::vector<RecordId> victims,
                              std::int64_t t_prev);

  SimulationConfig config_;
  Environment env_;
  MemoryBank bank_;
  std::unique_ptr<Agent> agent_;
  std::optional<std::vector<TaskInstance>> scripted_;
  std::size_t length_ = 0;
  std::size_t steps_done_ = 0;
  std::vector<StepTrace> traces_;
  std::vector<DeletedRecord> deletion_log_;
  std::size_t retrievals_logged_ = 0;
  std::size_t deleted_retrievals_ = 0;
  SweepObserver observer_;
};

struct SimulationResult {
  std::vector<StepTrace> traces;
  MemoryBank final_bank;
  std::vector<DeletedRecord> deletion_log;
  Environment environment;
};

SimulationResult run_simulation(const SimulationConfig& config);
std::vector<StepTrace> run_stream(const SimulationConfig& config);
// Same run, storing labelled targets on accepted additions.
std::vector<StepTrace> run_error_free_variant(SimulationConfig config);

struct ShiftedStream {
  std::vector<TaskInstance> tasks;
  std::vector<std::size_t> labels;  // cluster of each reordered task
};

// Clusters tasks by input vector with a diagonal GMM and returns them sorted
// stably by cluster label.
ShiftedStream make_shifted_stream(const std::vector<TaskInstance>& tasks, std::size_t clusters = 3,
                                  std::uint64_t seed = 0);

struct ShiftedRun {
  SimulationResult result;
  std::vector<std::size_t> labels;
};

// Builds the usual initial memory, draws stream_length tasks from the same
// environment, reorders them by cluster and replays them.
ShiftedRun run_shifted(const SimulationConfig& config, std::size_t clusters = 3);

}  // namespace memlab
