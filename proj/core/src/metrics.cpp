#include "memlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace memlab {

double success_rate(std::span<const StepTrace> trace) {
  if (trace.empty()) throw std::invalid_argument("success_rate: empty trace");
  const auto hits = std::count_if(trace.begin(), trace.end(), [](const StepTrace& s) { return s.success; });
  return static_cast<double>(hits) / static_cast<double>(trace.size());
}

std::vector<double> cumulative_average(std::span<const double> series) {
  std::vector<double> out;
  out.reserve(series.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    sum += series[i];
    out.push_back(sum / static_cast<double>(i + 1));
  }
  return out;
}

double mean(std::span<const double> xs) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double stddev(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("pearson: series lengths differ");
  if (xs.size() < 2) throw std::invalid_argument("pearson: need at least two points");
  const double mx = mean(xs), my = mean(ys);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw std::invalid_argument("pearson: constant series");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> input_similarities(std::span<const StepTrace> trace) {
  std::vector<double> out;
  out.reserve(trace.size());
  for (const auto& s : trace) out.push_back(s.input_similarity);
  return out;
}

std::vector<double> output_similarities(std::span<const StepTrace> trace) {
  std::vector<double> out;
  out.reserve(trace.size());
  for (const auto& s : trace) out.push_back(s.output_similarity);
  return out;
}

QualitySplit deleted_vs_retained(const MemoryBank& bank_final,
                                 std::span<const DeletedRecord> deletion_log,
                                 const Environment& env, std::size_t min_retrievals) {
  if (min_retrievals < 1) throw std::invalid_argument("deleted_vs_retained: min_retrievals must be >= 1");
  QualitySplit split;
  for (const auto& d : deletion_log) {
    if (d.retrieval_count > min_retrievals) {
      split.deleted_errors.push_back(std::abs(d.record.output - env.ground_truth(d.record.query_features)));
    }
  }
  for (const auto& slot : bank_final.slots()) {
    if (slot.ledger.retrieval_count() > min_retrievals) {
      split.retained_errors.push_back(
          std::abs(slot.record.output - env.ground_truth(slot.record.query_features)));
    }
  }
  if (split.deleted_errors.empty() && split.retained_errors.empty()) {
    throw std::invalid_argument("deleted_vs_retained: no record was retrieved more than " +
                                std::to_string(min_retrievals) + " times");
  }
  split.mean_deleted = mean(split.deleted_errors);
  split.mean_retained = mean(split.retained_errors);

  auto& h = split.histogram;
  h.lo = std::numeric_limits<double>::infinity();
  h.hi = -std::numeric_limits<double>::infinity();
  for (const auto* side : {&split.deleted_errors, &split.retained_errors}) {
    for (double e : *side) {
      h.lo = std::min(h.lo, e);
      h.hi = std::max(h.hi, e);
    }
  }
  h.deleted.assign(kQualityHistogramBins, 0);
  h.retained.assign(kQualityHistogramBins, 0);
  const double width = (h.hi - h.lo) / static_cast<double>(kQualityHistogramBins);
  const auto bin_of = [&](double e) -> std::size_t {
    if (width <= 0.0) return 0;
    const auto b = static_cast<std::size_t>((e - h.lo) / width);
    return std::min(b, kQualityHistogramBins - 1);
  };
  for (double e : split.deleted_errors) ++h.deleted[bin_of(e)];
  for (double e : split.retained_errors) ++h.retained[bin_of(e)];
  return split;
}

std::vector<BlockSuccess> block_success_rates(std::span<const StepTrace> trace,
                                              std::span<const std::size_t> labels) {
  if (trace.size() != labels.size()) {
    throw std::invalid_argument("block_success_rates: one label per step required");
  }
  std::vector<BlockSuccess> blocks;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (blocks.empty() || labels[i] != blocks.back().label) {
      if (!blocks.empty()) {
        blocks.back().success_rate = static_cast<double>(hits) / static_cast<double>(blocks.back().steps);
      }
      blocks.push_back({labels[i], i, 0, 0.0});
      hits = 0;
    }
    ++blocks.back().steps;
    if (trace[i].success) ++hits;
  }
  if (!blocks.empty()) {
    blocks.back().success_rate = static_cast<double>(hits) / static_cast<double>(blocks.back().steps);
  }
  return blocks;
}

RunSummary summarize(const SimulationResult& result, std::size_t min_retrievals) {
  RunSummary s;
  s.success_rate = success_rate(result.traces);
  s.final_mem_size = result.final_bank.size();
  const auto in = input_similarities(result.traces);
  const auto out = output_similarities(result.traces);
  try {
    s.pearson_input_output = pearson(in, out);
  } catch (const std::invalid_argument&) {
    s.pearson_input_output = std::numeric_limits<double>::quiet_NaN();
  }
  s.cumulative_input_sim = cumulative_average(in);
  s.cumulative_output_sim = cumulative_average(out);
  try {
    auto split = deleted_vs_retained(result.final_bank, result.deletion_log, result.environment,
                                     min_retrievals);
    s.deleted_errors = std::move(split.deleted_errors);
    s.retained_errors = std::move(split.retained_errors);
  } catch (const std::invalid_argument&) {
    // No qualifying records; leave both lists empty.
  }
  return s;
}

}  // namespace memlab
