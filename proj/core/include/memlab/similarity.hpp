#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "memlab/memory_bank.hpp"

namespace memlab {

// Every metric follows the same contract: higher means more similar, and
// m(a, b) == m(b, a).
using SimilarityFn = std::function<double(std::span<const double>, std::span<const double>)>;

double cosine_similarity(std::span<const double> u, std::span<const double> v);

double rbf_similarity(std::span<const double> a, std::span<const double> b, double gamma);
double rbf_similarity(double a, double b, double gamma);

enum class FeatureKind { continuous, discrete };

class FeatureSchema {
 public:
  explicit FeatureSchema(std::vector<FeatureKind> kinds);

  std::size_t size() const noexcept { return kinds_.size(); }
  FeatureKind operator[](std::size_t i) const { return kinds_[i]; }

 private:
  std::vector<FeatureKind> kinds_;
};

// 1 - mean per-feature relative change. Continuous change is
// |a - b| / max(|a|, |b|) with 0/0 taken as 0, capped at 1 for values of
// opposite sign; discrete change is 0 on equality and 1 otherwise.
double feature_relative_similarity(std::span<const double> a, std::span<const double> b,
                                   const FeatureSchema& schema);

struct ScoredRecord {
  RecordId id{};
  double score = 0.0;
};

// The k most similar records, best first; ties go to the older record. Does
// not touch the retrieval ledger.
std::vector<ScoredRecord> retrieve_top_k(const MemoryBank& bank, std::span<const double> query,
                                         std::size_t k, const SimilarityFn& metric);

}  // namespace memlab
