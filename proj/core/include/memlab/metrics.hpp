#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "memlab/memory_bank.hpp"
#include "memlab/regagent.hpp"
#include "memlab/simulation.hpp"

namespace memlab {

double success_rate(std::span<const StepTrace> trace);
std::vector<double> cumulative_average(std::span<const double> series);
// Sample Pearson correlation; throws on length < 2 or a constant series.
double pearson(std::span<const double> xs, std::span<const double> ys);

double mean(std::span<const double> xs);
// Sample standard deviation (n - 1); 0 for fewer than two values.
double stddev(std::span<const double> xs);

std::vector<double> input_similarities(std::span<const StepTrace> trace);
std::vector<double> output_similarities(std::span<const StepTrace> trace);

struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::size_t> deleted;
  std::vector<std::size_t> retained;
};

struct QualitySplit {
  std::vector<double> deleted_errors;
  std::vector<double> retained_errors;
  double mean_deleted = 0.0;   // NaN when the side is empty
  double mean_retained = 0.0;
  Histogram histogram;
};

inline constexpr std::size_t kQualityHistogramBins = 64;

// Splits records retrieved more than min_retrievals times into deleted and
// retained, scoring each by |output - w.x| against the noise-free functional.
QualitySplit deleted_vs_retained(const MemoryBank& bank_final,
                                 std::span<const DeletedRecord> deletion_log,
                                 const Environment& env, std::size_t min_retrievals = 5);

struct BlockSuccess {
  std::size_t label = 0;
  std::size_t begin = 0;  // first step index in the block
  std::size_t steps = 0;
  double success_rate = 0.0;
};

// Success rate of each contiguous run of equal labels.
std::vector<BlockSuccess> block_success_rates(std::span<const StepTrace> trace,
                                              std::span<const std::size_t> labels);

struct RunSummary {
  double success_rate = 0.0;
  std::size_t final_mem_size = 0;
  double pearson_input_output = 0.0;  // NaN when undefined
  std::vector<double> cumulative_input_sim;
  std::vector<double> cumulative_output_sim;
  std::vector<double> deleted_errors;
  std::vector<double> retained_errors;
};

RunSummary summarize(const SimulationResult& result, std::size_t min_retrievals = 5);

}  // namespace memlab
