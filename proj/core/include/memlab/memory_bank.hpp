#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace memlab {

// Record ids are handed out in creation order and never reused, so comparing
// ids also compares record age.
enum class RecordId : std::uint64_t {};

constexpr std::uint64_t to_underlying(RecordId id) noexcept {
  return static_cast<std::uint64_t>(id);
}

enum class Origin { initial, executed, error_free };

std::string_view to_string(Origin origin) noexcept;
Origin origin_from_string(std::string_view text);

struct MemoryRecord {
  RecordId id{};
  std::vector<double> query_features;
  double output = 0.0;  // the stored guess
  std::optional<double> truth;
  std::int64_t created_step = 0;
  Origin origin = Origin::initial;
};

// Retrieval history of one record. A retrieval is logged first and its
// utility is filled in later in the same step, once the execution it fed
// into has been evaluated.
class UtilityLedger {
 public:
  struct Entry {
    std::int64_t step = 0;
    std::optional<double> utility;
  };

  void log_retrieval(std::int64_t step);
  void log_utility(std::int64_t step, double utility);

  std::size_t retrieval_count() const noexcept { return entries_.size(); }
  // Retrievals s with t_prev < s <= t_now.
  std::size_t count_in_window(std::int64_t t_prev, std::int64_t t_now) const;
  std::size_t pending_count() const noexcept;
  // Mean over the retrievals whose utility is known; nullopt if none.
  std::optional<double> mean_utility() const noexcept;

  std::vector<std::int64_t> retrieval_steps() const;
  std::vector<double> utilities() const;
  const std::vector<Entry>& entries() const noexcept { return entries_; }

 private:
  std::vector<Entry> entries_;
  double utility_sum_ = 0.0;
  std::size_t utility_count_ = 0;
};

class MemoryBank {
 public:
  struct Slot {
    MemoryRecord record;
    UtilityLedger ledger;
  };

  explicit MemoryBank(std::size_t dimension,
                      std::optional<std::size_t> capacity = std::nullopt);

  RecordId insert_record(std::span<const double> query_features, double output,
                         std::optional<double> truth, std::int64_t step,
                         Origin origin);

  void log_retrieval(RecordId id, std::int64_t step);
  void log_utility(RecordId id, std::int64_t step, double utility);
  std::size_t retrieval_count_in_window(RecordId id, std::int64_t t_prev,
                                        std::int64_t t_now) const;

  // Unknown ids are ignored; returns how many records were actually removed.
  std::size_t remove_records(std::span<const RecordId> ids);

  bool contains(RecordId id) const noexcept;
  const MemoryRecord& record(RecordId id) const;
  const UtilityLedger& ledger(RecordId id) const;

  std::size_t size() const noexcept { return slots_.size(); }
  bool empty() const noexcept { return slots_.empty(); }
  std::size_t dimension() const noexcept { return dimension_; }
  std::optional<std::size_t> capacity() const noexcept { return capacity_; }
  // Id the next insert will receive.
  RecordId next_id() const noexcept { return next_id_; }

  // Ordered by id, oldest first.
  std::span<const Slot> slots() const noexcept { return slots_; }
  std::vector<RecordId> ids() const;

  // Restores a record verbatim (snapshot loading). The id must be newer than
  // every id currently held.
  void restore(Slot slot);
  // Ensures future ids are at least `id` (ids of deleted records stay burned).
  void advance_next_id(RecordId id) noexcept;

 private:
  const Slot& slot(RecordId id) const;
  Slot& slot(RecordId id);

  std::size_t dimension_;
  std::optional<std::size_t> capacity_;
  std::vector<Slot> slots_;
  RecordId next_id_{0};
};

}  // namespace memlab
