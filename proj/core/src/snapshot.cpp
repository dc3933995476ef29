#include "memlab/snapshot.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace memlab {
namespace {

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
  throw std::invalid_argument("snapshot line " + std::to_string(line_no) + ": " + what);
}

double parse_real(const std::string& text, std::size_t line_no) {
  try {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    if (used != text.size()) fail(line_no, "bad real '" + text + "'");
    return v;
  } catch (const std::logic_error&) {
    fail(line_no, "bad real '" + text + "'");
  }
}

std::int64_t parse_int(const std::string& text, std::size_t line_no) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    fail(line_no, "bad integer '" + text + "'");
  }
  return v;
}

std::string after_key(const std::string& token, const std::string& key, std::size_t line_no) {
  if (token.rfind(key + "=", 0) != 0) fail(line_no, "expected " + key + "=...");
  return token.substr(key.size() + 1);
}

}  // namespace

void write_snapshot(std::ostream& out, const MemoryBank& bank) {
  out << "memlab-bank v1 dimension=" << bank.dimension()
      << " next_id=" << to_underlying(bank.next_id()) << " capacity=";
  if (bank.capacity()) {
    out << *bank.capacity();
  } else {
    out << "none";
  }
  out << '\n';
  for (const auto& slot : bank.slots()) {
    const auto& r = slot.record;
    out << "record " << to_underlying(r.id) << ' ' << r.created_step << ' ' << to_string(r.origin)
        << ' ' << (r.truth ? format_real(*r.truth) : std::string("none")) << ' '
        << format_real(r.output) << ' ';
    for (std::size_t i = 0; i < r.query_features.size(); ++i) {
      if (i) out << ',';
      out << format_real(r.query_features[i]);
    }
    out << '\n';
  }
  for (const auto& slot : bank.slots()) {
    if (slot.ledger.retrieval_count() == 0) continue;
    out << "ledger " << to_underlying(slot.record.id);
    for (const auto& e : slot.ledger.entries()) {
      out << ' ' << e.step << ':' << (e.utility ? format_real(*e.utility) : std::string("pending"));
    }
    out << '\n';
  }
}

std::string snapshot_string(const MemoryBank& bank) {
  std::ostringstream out;
  write_snapshot(out, bank);
  return out.str();
}

MemoryBank read_snapshot(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) fail(line_no, "missing header");
  std::istringstream header(line);
  std::string magic, version, dim_tok, next_tok, cap_tok;
  header >> magic >> version >> dim_tok >> next_tok >> cap_tok;
  if (magic != "memlab-bank" || version != "v1") fail(line_no, "not a memlab-bank v1 snapshot");
  const auto dimension = parse_int(after_key(dim_tok, "dimension", line_no), line_no);
  const auto next_id = parse_int(after_key(next_tok, "next_id", line_no), line_no);
  const auto cap_text = after_key(cap_tok, "capacity", line_no);
  std::optional<std::size_t> capacity;
  if (cap_text != "none") capacity = static_cast<std::size_t>(parse_int(cap_text, line_no));
  if (dimension < 1) fail(line_no, "dimension must be positive");

  MemoryBank bank(static_cast<std::size_t>(dimension), capacity);
  std::map<std::uint64_t, MemoryBank::Slot> slots;
  bool in_ledgers = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string kind;
    fields >> kind;
    if (kind == "record") {
      if (in_ledgers) fail(line_no, "record line after ledger lines");
      std::string id, step, origin, truth, output, features;
      if (!(fields >> id >> step >> origin >> truth >> output >> features)) {
        fail(line_no, "record line needs 6 fields");
      }
      MemoryBank::Slot slot;
      slot.record.id = RecordId{static_cast<std::uint64_t>(parse_int(id, line_no))};
      slot.record.created_step = parse_int(step, line_no);
      try {
        slot.record.origin = origin_from_string(origin);
      } catch (const std::invalid_argument& e) {
        fail(line_no, e.what());
      }
      if (truth != "none") slot.record.truth = parse_real(truth, line_no);
      slot.record.output = parse_real(output, line_no);
      std::istringstream feats(features);
      std::string f;
      while (std::getline(feats, f, ',')) slot.record.query_features.push_back(parse_real(f, line_no));
      if (slot.record.query_features.size() != bank.dimension()) {
        fail(line_no, "feature count does not match dimension");
      }
      const auto key = to_underlying(slot.record.id);
      if (!slots.empty() && key <= slots.rbegin()->first) fail(line_no, "record ids must ascend");
      slots.emplace(key, std::move(slot));
    } else if (kind == "ledger") {
      in_ledgers = true;
      std::string id_text;
      fields >> id_text;
      auto it = slots.find(static_cast<std::uint64_t>(parse_int(id_text, line_no)));
      if (it == slots.end()) fail(line_no, "ledger for unknown record " + id_text);
      if (it->second.ledger.retrieval_count() != 0) fail(line_no, "duplicate ledger line");
      std::string entry;
      while (fields >> entry) {
        const auto colon = entry.find(':');
        if (colon == std::string::npos) fail(line_no, "ledger entry '" + entry + "' lacks ':'");
        const auto step = parse_int(entry.substr(0, colon), line_no);
        const auto value = entry.substr(colon + 1);
        try {
          it->second.ledger.log_retrieval(step);
          if (value != "pending") it->second.ledger.log_utility(step, parse_real(value, line_no));
        } catch (const std::logic_error& e) {
          fail(line_no, e.what());
        }
      }
    } else {
      fail(line_no, "unknown line kind '" + kind + "'");
    }
  }
  for (auto& [key, slot] : slots) bank.restore(std::move(slot));
  bank.advance_next_id(RecordId{static_cast<std::uint64_t>(next_id)});
  return bank;
}

}  // namespace memlab
