#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

namespace saber {

/// A child process with line-oriented pipes on its stdin and stdout. Stderr
/// is inherited. The destructor kills and reaps a child that is still alive.
class Subprocess {
 public:
  enum class ReadStatus { Line, Timeout, Eof };
  struct ReadResult {
    ReadStatus status;
    std::string line;
  };

  /// Throws SpawnFailure when argv is empty or the executable cannot be run.
  explicit Subprocess(const std::vector<std::string>& argv);
  ~Subprocess();
  Subprocess(const Subprocess&) = delete;
  Subprocess& operator=(const Subprocess&) = delete;

  /// Writes `line` plus a newline. Returns false if the child closed its end
  /// or the write did not finish within `timeout`.
  bool write_line(const std::string& line, std::chrono::milliseconds timeout);
  ReadResult read_line(std::chrono::milliseconds timeout);
  void close_stdin();

  /// Waits up to `timeout` for exit and returns the wait status as
  /// exit code (or 128+signal), nullopt if still running.
  std::optional<int> wait_for(std::chrono::milliseconds timeout);
  void kill();
  bool exited() const { return exit_code_.has_value(); }
  std::optional<int> exit_code() const { return exit_code_; }

 private:
  bool try_reap();

  int pid_ = -1;
  int in_fd_ = -1;
  int out_fd_ = -1;
  std::string buffer_;
  bool eof_ = false;
  std::optional<int> exit_code_;
};

}  // namespace saber
