#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "memlab/memory_bank.hpp"

namespace memlab {

enum class DeletionMode { none, periodic, history, combined, capacity };

std::string_view to_string(DeletionMode mode) noexcept;
DeletionMode deletion_mode_from_string(std::string_view text);

struct DeletionConfig {
  DeletionMode mode = DeletionMode::none;
  std::int64_t period = 500;
  std::int64_t alpha = 0;
  std::size_t min_retrievals_n = 5;
  double beta = 0.5;
  std::optional<std::size_t> capacity;

  void validate() const;
  bool periodic_due(std::int64_t step) const noexcept;
};

// Records retrieved at most alpha times in (t_prev, t_now].
std::vector<RecordId> periodic_victims(const MemoryBank& bank, std::int64_t t_now,
                                       std::int64_t t_prev, std::int64_t alpha);
// Records retrieved more than n times whose mean utility is at most beta.
std::vector<RecordId> history_victims(const MemoryBank& bank, std::size_t n, double beta);
std::vector<RecordId> combined_victims(const MemoryBank& bank, std::int64_t t_now,
                                       std::int64_t t_prev, std::int64_t alpha, std::size_t n,
                                       double beta);

// The *_delete functions remove their victims and return them, oldest first.
std::vector<RecordId> periodic_delete(MemoryBank& bank, std::int64_t t_now, std::int64_t t_prev,
                                      std::int64_t alpha);
std::vector<RecordId> history_delete(MemoryBank& bank, std::size_t n, double beta);
std::vector<RecordId> combined_delete(MemoryBank& bank, std::int64_t t_now, std::int64_t t_prev,
                                      std::int64_t alpha, std::size_t n, double beta);

// Score used to rank eviction candidates; never-retrieved records count as
// neutral (0.5).
inline constexpr double kUnretrievedUtility = 0.5;
double eviction_score(const UtilityLedger& ledger) noexcept;

// Lowest-scoring record, oldest on ties. Bank must be non-empty.
RecordId capacity_victim(const MemoryBank& bank);

// Removes the lowest-scoring record (oldest on ties) one at a time until the
// bank fits; returns ids in removal order.
std::vector<RecordId> capacity_evict(MemoryBank& bank, std::size_t capacity);

}  // namespace memlab
