#pragma once

#include <iosfwd>
#include <string>

#include "memlab/memory_bank.hpp"

namespace memlab {

// Line-oriented text dump of a bank:
//
//   memlab-bank v1 dimension=<d> next_id=<n> capacity=<c|none>
//   record <id> <created_step> <origin> <truth|none> <output> <f1,f2,...>
//   ledger <id> <step:utility|step:pending> ...
//
// One record line per record (oldest first), then one ledger line per record
// with at least one retrieval. Reals are written with 17 significant digits
// so a dump reloads bit-exactly.
void write_snapshot(std::ostream& out, const MemoryBank& bank);
std::string snapshot_string(const MemoryBank& bank);

// Throws std::invalid_argument naming the offending line.
MemoryBank read_snapshot(std::istream& in);

}  // namespace memlab
