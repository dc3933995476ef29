#include "memlab/adapter.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <nlohmann/json.hpp>

namespace memlab {

std::string encode_request(std::span<const double> query, std::span<const Demonstration> demos) {
  nlohmann::json demo_list = nlohmann::json::array();
  for (const auto& d : demos) {
    demo_list.push_back({{"x", std::vector<double>(d.x.begin(), d.x.end())}, {"guess", d.guess}});
  }
  nlohmann::json req{{"query", std::vector<double>(query.begin(), query.end())},
                     {"demos", std::move(demo_list)}};
  return req.dump();
}

double decode_response(const std::string& line) {
  nlohmann::json msg;
  try {
    msg = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw AdapterError(std::string("adapter response is not JSON: ") + e.what());
  }
  if (!msg.is_object() || !msg.contains("guess") || !msg["guess"].is_number()) {
    throw AdapterError("adapter response lacks a numeric 'guess': " + line);
  }
  const double guess = msg["guess"].get<double>();
  if (!std::isfinite(guess)) throw AdapterError("adapter returned a non-finite guess");
  return guess;
}

SubprocessAgent::SubprocessAgent(const std::string& command, std::chrono::milliseconds timeout)
    : timeout_(timeout) {
  // A dead child must surface as a write error, not kill this process.
  ::signal(SIGPIPE, SIG_IGN);
  int in_pipe[2], out_pipe[2];
  if (pipe2(in_pipe, O_CLOEXEC) != 0) throw AdapterError("pipe: " + std::string(std::strerror(errno)));
  if (pipe2(out_pipe, O_CLOEXEC) != 0) {
    close(in_pipe[0]);
    close(in_pipe[1]);
    throw AdapterError("pipe: " + std::string(std::strerror(errno)));
  }
  pid_ = fork();
  if (pid_ < 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) close(fd);
    throw AdapterError("fork: " + std::string(std::strerror(errno)));
  }
  if (pid_ == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
}

SubprocessAgent::~SubprocessAgent() { shutdown(); }

void SubprocessAgent::shutdown() noexcept {
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0) {
    // Closing stdin asks the child to exit; give it a moment before killing.
    for (int i = 0; i < 50; ++i) {
      if (waitpid(pid_, nullptr, WNOHANG) == pid_) {
        pid_ = -1;
        return;
      }
      usleep(2000);
    }
    kill(pid_, SIGKILL);
    waitpid(pid_, nullptr, 0);
    pid_ = -1;
  }
}

std::string SubprocessAgent::round_trip(const std::string& request_line) {
  if (to_child_ < 0) throw AdapterError("adapter process is not running");
  std::string payload = request_line + '\n';
  std::size_t sent = 0;
  while (sent < payload.size()) {
    const ssize_t n = ::write(to_child_, payload.data() + sent, payload.size() - sent);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw AdapterError("write to adapter failed: " + std::string(std::strerror(errno)));
    }
    sent += static_cast<std::size_t>(n);
  }
  return read_line();
}

std::string SubprocessAgent::read_line() {
  const auto deadline = std::chrono::steady_clock::now() + timeout_;
  for (;;) {
    if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) throw AdapterError("adapter timed out waiting for a response");
    pollfd pfd{from_child_, POLLIN, 0};
    const int ready = poll(&pfd, 1, static_cast<int>(left.count()));
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw AdapterError("poll failed: " + std::string(std::strerror(errno)));
    }
    if (ready == 0) continue;
    char chunk[4096];
    const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw AdapterError("read from adapter failed: " + std::string(std::strerror(errno)));
    }
    if (n == 0) throw AdapterError("adapter closed its output");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

double SubprocessAgent::execute(std::span<const double> x, std::span<const Demonstration> demos) {
  return decode_response(round_trip(encode_request(x, demos)));
}

}  // namespace memlab
