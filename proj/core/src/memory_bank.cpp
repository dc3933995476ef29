#include "memlab/memory_bank.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>

namespace memlab {

std::string_view to_string(Origin origin) noexcept {
  switch (origin) {
    case Origin::initial:
      return "initial";
    case Origin::executed:
      return "executed";
    case Origin::error_free:
      return "error_free";
  }
  return "initial";
}

Origin origin_from_string(std::string_view text) {
  if (text == "initial") return Origin::initial;
  if (text == "executed") return Origin::executed;
  if (text == "error_free") return Origin::error_free;
  throw std::invalid_argument("unknown record origin '" + std::string(text) + "'");
}

void UtilityLedger::log_retrieval(std::int64_t step) {
  if (step < 0) throw std::invalid_argument("retrieval step must be non-negative");
  // A record is retrieved at most once per step.
  if (!entries_.empty() && step <= entries_.back().step) {
    throw std::invalid_argument("retrieval step " + std::to_string(step) +
                                " does not follow last logged step " +
                                std::to_string(entries_.back().step));
  }
  entries_.push_back({step, std::nullopt});
}

void UtilityLedger::log_utility(std::int64_t step, double utility) {
  if (!std::isfinite(utility) || utility < 0.0 || utility > 1.0) {
    throw std::invalid_argument("utility must lie in [0, 1]");
  }
  auto it = std::lower_bound(entries_.begin(), entries_.end(), step,
                             [](const Entry& e, std::int64_t s) { return e.step < s; });
  if (it == entries_.end() || it->step != step || it->utility.has_value()) {
    throw std::logic_error("no pending retrieval at step " + std::to_string(step));
  }
  it->utility = utility;
  utility_sum_ += utility;
  ++utility_count_;
}

std::size_t UtilityLedger::count_in_window(std::int64_t t_prev, std::int64_t t_now) const {
  if (t_prev > t_now) throw std::invalid_argument("window start exceeds window end");
  auto by_step = [](const Entry& e, std::int64_t s) { return e.step <= s; };
  auto lo = std::lower_bound(entries_.begin(), entries_.end(), t_prev, by_step);
  auto hi = std::lower_bound(entries_.begin(), entries_.end(), t_now, by_step);
  return static_cast<std::size_t>(hi - lo);
}

std::size_t UtilityLedger::pending_count() const noexcept {
  return entries_.size() - utility_count_;
}

std::optional<double> UtilityLedger::mean_utility() const noexcept {
  if (utility_count_ == 0) return std::nullopt;
  return utility_sum_ / static_cast<double>(utility_count_);
}

std::vector<std::int64_t> UtilityLedger::retrieval_steps() const {
  std::vector<std::int64_t> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.step);
  return out;
}

std::vector<double> UtilityLedger::utilities() const {
  std::vector<double> out;
  out.reserve(utility_count_);
  for (const auto& e : entries_) {
    if (e.utility) out.push_back(*e.utility);
  }
  return out;
}

MemoryBank::MemoryBank(std::size_t dimension, std::optional<std::size_t> capacity)
    : dimension_(dimension), capacity_(capacity) {
  if (dimension == 0) throw std::invalid_argument("bank dimension must be positive");
  if (capacity && *capacity == 0) throw std::invalid_argument("bank capacity must be positive");
}

RecordId MemoryBank::insert_record(std::span<const double> query_features, double output,
                                   std::optional<double> truth, std::int64_t step,
                                   Origin origin) {
  if (query_features.size() != dimension_) {
    throw std::invalid_argument("query features have dimension " +
                                std::to_string(query_features.size()) + ", bank expects " +
                                std::to_string(dimension_));
  }
  if (step < 0) throw std::invalid_argument("created step must be non-negative");
  const RecordId id = next_id_;
  next_id_ = RecordId{to_underlying(id) + 1};
  Slot s;
  s.record.id = id;
  s.record.query_features.assign(query_features.begin(), query_features.end());
  s.record.output = output;
  s.record.truth = truth;
  s.record.created_step = step;
  s.record.origin = origin;
  slots_.push_back(std::move(s));
  return id;
}

void MemoryBank::log_retrieval(RecordId id, std::int64_t step) {
  slot(id).ledger.log_retrieval(step);
}

void MemoryBank::log_utility(RecordId id, std::int64_t step, double utility) {
  slot(id).ledger.log_utility(step, utility);
}

std::size_t MemoryBank::retrieval_count_in_window(RecordId id, std::int64_t t_prev,
                                                  std::int64_t t_now) const {
  return slot(id).ledger.count_in_window(t_prev, t_now);
}

std::size_t MemoryBank::remove_records(std::span<const RecordId> ids) {
  if (ids.empty()) return 0;
  std::unordered_set<RecordId> doomed(ids.begin(), ids.end());
  const auto before = slots_.size();
  std::erase_if(slots_, [&](const Slot& s) { return doomed.contains(s.record.id); });
  return before - slots_.size();
}

bool MemoryBank::contains(RecordId id) const noexcept {
  auto it = std::lower_bound(slots_.begin(), slots_.end(), id,
                             [](const Slot& s, RecordId v) { return s.record.id < v; });
  return it != slots_.end() && it->record.id == id;
}

const MemoryRecord& MemoryBank::record(RecordId id) const { return slot(id).record; }

const UtilityLedger& MemoryBank::ledger(RecordId id) const { return slot(id).ledger; }

std::vector<RecordId> MemoryBank::ids() const {
  std::vector<RecordId> out;
  out.reserve(slots_.size());
  for (const auto& s : slots_) out.push_back(s.record.id);
  return out;
}

void MemoryBank::restore(Slot s) {
  if (s.record.query_features.size() != dimension_) {
    throw std::invalid_argument("restored record has wrong dimension");
  }
  if (s.record.id < next_id_) {
    throw std::invalid_argument("restored record id " + std::to_string(to_underlying(s.record.id)) +
                                " is not newer than existing ids");
  }
  next_id_ = RecordId{to_underlying(s.record.id) + 1};
  slots_.push_back(std::move(s));
}

void MemoryBank::advance_next_id(RecordId id) noexcept {
  if (next_id_ < id) next_id_ = id;
}

const MemoryBank::Slot& MemoryBank::slot(RecordId id) const {
  auto it = std::lower_bound(slots_.begin(), slots_.end(), id,
                             [](const Slot& s, RecordId v) { return s.record.id < v; });
  if (it == slots_.end() || it->record.id != id) {
    throw std::out_of_range("unknown record id " + std::to_string(to_underlying(id)));
  }
  return *it;
}

MemoryBank::Slot& MemoryBank::slot(RecordId id) {
  return const_cast<Slot&>(std::as_const(*this).slot(id));
}

}  // namespace memlab
