#include "memlab/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace memlab {
namespace {

void require_same_size(std::span<const double> a, std::span<const double> b, const char* what) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  }
}

}  // namespace

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  require_same_size(u, v, "cosine_similarity");
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (uu == 0.0 || vv == 0.0) throw std::invalid_argument("cosine_similarity: zero-norm vector");
  // sqrt(uu * vv) keeps cos(u, u) exactly 1.
  return std::clamp(dot / std::sqrt(uu * vv), -1.0, 1.0);
}

double rbf_similarity(std::span<const double> a, std::span<const double> b, double gamma) {
  require_same_size(a, b, "rbf_similarity");
  if (!(gamma > 0.0)) throw std::invalid_argument("rbf_similarity: gamma must be positive");
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sq += d * d;
  }
  return std::exp(-gamma * sq);
}

double rbf_similarity(double a, double b, double gamma) {
  return rbf_similarity(std::span<const double>(&a, 1), std::span<const double>(&b, 1), gamma);
}

FeatureSchema::FeatureSchema(std::vector<FeatureKind> kinds) : kinds_(std::move(kinds)) {
  if (kinds_.empty()) throw std::invalid_argument("feature schema must be non-empty");
}

double feature_relative_similarity(std::span<const double> a, std::span<const double> b,
                                   const FeatureSchema& schema) {
  if (a.size() != schema.size() || b.size() != schema.size()) {
    throw std::invalid_argument("feature_relative_similarity: rows do not match schema");
  }
  double change = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (schema[i] == FeatureKind::discrete) {
      change += (a[i] == b[i]) ? 0.0 : 1.0;
    } else {
      const double scale = std::max(std::abs(a[i]), std::abs(b[i]));
      // A sign flip would exceed 1; count it as a full change.
      if (scale > 0.0) change += std::min(1.0, std::abs(a[i] - b[i]) / scale);
    }
  }
  return 1.0 - change / static_cast<double>(a.size());
}

std::vector<ScoredRecord> retrieve_top_k(const MemoryBank& bank, std::span<const double> query,
                                         std::size_t k, const SimilarityFn& metric) {
  if (bank.empty()) throw std::invalid_argument("retrieve_top_k: memory bank is empty");
  if (k == 0) throw std::invalid_argument("retrieve_top_k: k must be positive");
  if (query.size() != bank.dimension()) {
    throw std::invalid_argument("retrieve_top_k: query dimension does not match bank");
  }
  std::vector<ScoredRecord> scored;
  scored.reserve(bank.size());
  for (const auto& slot : bank.slots()) {
    scored.push_back({slot.record.id, metric(query, slot.record.query_features)});
  }
  const auto better = [](const ScoredRecord& a, const ScoredRecord& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  };
  const auto keep = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end(),
                    better);
  scored.resize(keep);
  return scored;
}

}  // namespace memlab
