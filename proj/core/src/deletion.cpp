#include "memlab/deletion.hpp"

#include <algorithm>
#include <iterator>
#include <stdexcept>
#include <string>

namespace memlab {

std::string_view to_string(DeletionMode mode) noexcept {
  switch (mode) {
    case DeletionMode::none:
      return "none";
    case DeletionMode::periodic:
      return "periodic";
    case DeletionMode::history:
      return "history";
    case DeletionMode::combined:
      return "combined";
    case DeletionMode::capacity:
      return "capacity";
  }
  return "none";
}

DeletionMode deletion_mode_from_string(std::string_view text) {
  if (text == "none") return DeletionMode::none;
  if (text == "periodic") return DeletionMode::periodic;
  if (text == "history") return DeletionMode::history;
  if (text == "combined") return DeletionMode::combined;
  if (text == "capacity") return DeletionMode::capacity;
  throw std::invalid_argument("unknown deletion mode '" + std::string(text) + "'");
}

void DeletionConfig::validate() const {
  if (period < 1) throw std::invalid_argument("deletion period must be positive");
  if (alpha < 0) throw std::invalid_argument("deletion alpha must be non-negative");
  if (min_retrievals_n < 1) throw std::invalid_argument("min_retrievals_n must be positive");
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in [0, 1]");
  if (mode == DeletionMode::capacity) {
    if (!capacity || *capacity < 1) {
      throw std::invalid_argument("capacity mode requires a positive capacity");
    }
  } else if (capacity) {
    throw std::invalid_argument("capacity is only valid with capacity mode");
  }
}

bool DeletionConfig::periodic_due(std::int64_t step) const noexcept {
  const bool uses_period = mode == DeletionMode::periodic || mode == DeletionMode::combined ||
                           mode == DeletionMode::capacity;
  return uses_period && step > 0 && step % period == 0;
}

std::vector<RecordId> periodic_victims(const MemoryBank& bank, std::int64_t t_now,
                                       std::int64_t t_prev, std::int64_t alpha) {
  if (t_prev > t_now) throw std::invalid_argument("periodic sweep window is inverted");
  std::vector<RecordId> out;
  for (const auto& slot : bank.slots()) {
    const auto hits = slot.ledger.count_in_window(t_prev, t_now);
    if (static_cast<std::int64_t>(hits) <= alpha) out.push_back(slot.record.id);
  }
  return out;
}

std::vector<RecordId> history_victims(const MemoryBank& bank, std::size_t n, double beta) {
  if (n < 1) throw std::invalid_argument("history sweep requires n >= 1");
  std::vector<RecordId> out;
  for (const auto& slot : bank.slots()) {
    if (slot.ledger.retrieval_count() <= n) continue;
    const auto mean = slot.ledger.mean_utility();
    if (mean && *mean <= beta) out.push_back(slot.record.id);
  }
  return out;
}

std::vector<RecordId> combined_victims(const MemoryBank& bank, std::int64_t t_now,
                                       std::int64_t t_prev, std::int64_t alpha, std::size_t n,
                                       double beta) {
  const auto per = periodic_victims(bank, t_now, t_prev, alpha);
  const auto hist = history_victims(bank, n, beta);
  std::vector<RecordId> out;
  std::set_union(per.begin(), per.end(), hist.begin(), hist.end(), std::back_inserter(out));
  return out;
}

std::vector<RecordId> periodic_delete(MemoryBank& bank, std::int64_t t_now, std::int64_t t_prev,
                                      std::int64_t alpha) {
  auto victims = periodic_victims(bank, t_now, t_prev, alpha);
  bank.remove_records(victims);
  return victims;
}

std::vector<RecordId> history_delete(MemoryBank& bank, std::size_t n, double beta) {
  auto victims = history_victims(bank, n, beta);
  bank.remove_records(victims);
  return victims;
}

std::vector<RecordId> combined_delete(MemoryBank& bank, std::int64_t t_now, std::int64_t t_prev,
                                      std::int64_t alpha, std::size_t n, double beta) {
  auto victims = combined_victims(bank, t_now, t_prev, alpha, n, beta);
  bank.remove_records(victims);
  return victims;
}

double eviction_score(const UtilityLedger& ledger) noexcept {
  return ledger.mean_utility().value_or(kUnretrievedUtility);
}

RecordId capacity_victim(const MemoryBank& bank) {
  if (bank.empty()) throw std::invalid_argument("capacity_victim: bank is empty");
  const auto slots = bank.slots();
  // min_element keeps the first minimum, i.e. the oldest record on ties.
  const auto worst = std::min_element(slots.begin(), slots.end(), [](const auto& a, const auto& b) {
    return eviction_score(a.ledger) < eviction_score(b.ledger);
  });
  return worst->record.id;
}

std::vector<RecordId> capacity_evict(MemoryBank& bank, std::size_t capacity) {
  if (capacity < 1) throw std::invalid_argument("capacity must be at least 1");
  std::vector<RecordId> removed;
  while (bank.size() > capacity) {
    const RecordId id = capacity_victim(bank);
    bank.remove_records(std::span<const RecordId>(&id, 1));
    removed.push_back(id);
  }
  return removed;
}

}  // namespace memlab
