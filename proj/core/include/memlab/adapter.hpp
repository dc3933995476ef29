#pragma once

#include <chrono>
#include <span>
#include <stdexcept>
#include <string>
#include <sys/types.h>

#include "memlab/regagent.hpp"

namespace memlab {

// Wire format, one JSON object per line in each direction:
//   request:  {"query": [reals], "demos": [{"x": [reals], "guess": real}, ...]}
//   response: {"guess": real}
std::string encode_request(std::span<const double> query, std::span<const Demonstration> demos);
// Throws std::runtime_error on malformed or non-finite responses.
double decode_response(const std::string& line);

class AdapterError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Runs `command` under /bin/sh and speaks the wire format over its stdin and
// stdout. Stderr is inherited.
class SubprocessAgent final : public Agent {
 public:
  SubprocessAgent(const std::string& command, std::chrono::milliseconds timeout);
  ~SubprocessAgent() override;

  SubprocessAgent(const SubprocessAgent&) = delete;
  SubprocessAgent& operator=(const SubprocessAgent&) = delete;

  double execute(std::span<const double> x, std::span<const Demonstration> demos) override;

  // Raw request/response exchange.
  std::string round_trip(const std::string& request_line);

 private:
  std::string read_line();
  void shutdown() noexcept;

  std::chrono::milliseconds timeout_;
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

}  // namespace memlab
