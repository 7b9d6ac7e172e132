#include <csignal>
#include <cstring>
#include <stdexcept>
#include <string>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include "bitcurve/objective.hpp"
#include "json.hpp"

namespace bitcurve::objective {

namespace {

struct Pipe {
  int read_fd = -1;
  int write_fd = -1;
  bool open() {
    int fds[2];
    if (::pipe(fds) != 0) return false;
    read_fd = fds[0];
    write_fd = fds[1];
    return true;
  }
  void close_read() {
    if (read_fd >= 0) ::close(read_fd);
    read_fd = -1;
  }
  void close_write() {
    if (write_fd >= 0) ::close(write_fd);
    write_fd = -1;
  }
  ~Pipe() {
    close_read();
    close_write();
  }
};

std::string request_line(const Request& request) {
  nlohmann::json obj;
  obj["bits"] = request.bits.bits;
  obj["epochs"] = request.epochs;
  obj["seed"] = request.seed;
  return obj.dump() + "\n";
}

Result parse_response(const std::string& line) {
  Result result;
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    return {0.0, Status::kFailed, std::string("malformed response: ") + e.what(), {}};
  }
  if (!obj.contains("accuracy") || !obj["accuracy"].is_number()) {
    return {0.0, Status::kFailed, "response lacks a numeric 'accuracy' field", {}};
  }
  result.accuracy = obj["accuracy"].get<double>();
  if (!(result.accuracy >= 0.0 && result.accuracy <= 1.0)) {
    return {0.0, Status::kFailed,
            "accuracy outside [0,1]: " + std::to_string(result.accuracy), {}};
  }
  if (obj.contains("cost_seconds") && obj["cost_seconds"].is_number()) {
    result.cost_seconds = obj["cost_seconds"].get<double>();
  }
  return result;
}

}  // namespace

ExternalObjective::ExternalObjective(std::string command, double timeout_seconds)
    : command_(std::move(command)), timeout_seconds_(timeout_seconds) {
  if (command_.empty()) throw std::invalid_argument("external command is empty");
  if (!(timeout_seconds_ > 0.0)) throw std::invalid_argument("timeout must be positive");
  // A trainer dying mid-write must surface as EPIPE, not kill this process.
  std::signal(SIGPIPE, SIG_IGN);
}

Result ExternalObjective::evaluate(const Request& request) {
  Pipe to_child;
  Pipe from_child;
  if (!to_child.open() || !from_child.open()) {
    return {0.0, Status::kFailed, "pipe creation failed", {}};
  }

  const pid_t pid = ::fork();
  if (pid < 0) return {0.0, Status::kFailed, "fork failed", {}};
  if (pid == 0) {
    ::dup2(to_child.read_fd, STDIN_FILENO);
    ::dup2(from_child.write_fd, STDOUT_FILENO);
    to_child.close_read();
    to_child.close_write();
    from_child.close_read();
    from_child.close_write();
    ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }

  to_child.close_read();
  from_child.close_write();

  const std::string line = request_line(request);
  ssize_t written = ::write(to_child.write_fd, line.data(), line.size());
  to_child.close_write();  // EOF lets one-shot trainers finish
  const bool write_ok = written == static_cast<ssize_t>(line.size());

  const auto deadline_ms = static_cast<long>(timeout_seconds_ * 1000.0);
  long waited_ms = 0;
  std::string response;
  bool timed_out = false;
  bool got_line = false;
  while (!got_line) {
    struct pollfd pfd {
      from_child.read_fd, POLLIN, 0
    };
    const long remaining = deadline_ms - waited_ms;
    if (remaining <= 0) {
      timed_out = true;
      break;
    }
    const long slice = std::min<long>(remaining, 50);
    const int ready = ::poll(&pfd, 1, static_cast<int>(slice));
    waited_ms += slice;
    if (ready < 0) break;
    if (ready == 0) continue;
    char buffer[512];
    const ssize_t n = ::read(from_child.read_fd, buffer, sizeof(buffer));
    if (n <= 0) break;  // EOF before a full line
    response.append(buffer, static_cast<std::size_t>(n));
    got_line = response.find('\n') != std::string::npos;
  }

  int exit_status = 0;
  if (timed_out) {
    ::kill(pid, SIGKILL);
    ::waitpid(pid, &exit_status, 0);
    return {0.0, Status::kTimeout,
            "deadline of " + std::to_string(timeout_seconds_) + "s exceeded", {}};
  }
  ::waitpid(pid, &exit_status, 0);

  if (!write_ok) {
    return {0.0, Status::kFailed, "could not deliver the request", {}};
  }
  if (!WIFEXITED(exit_status) || WEXITSTATUS(exit_status) != 0) {
    return {0.0, Status::kFailed,
            "trainer exited with status " +
                std::to_string(WIFEXITED(exit_status) ? WEXITSTATUS(exit_status) : -1),
            {}};
  }
  const std::size_t newline = response.find('\n');
  if (newline == std::string::npos && response.empty()) {
    return {0.0, Status::kFailed, "no response line on stdout", {}};
  }
  return parse_response(newline == std::string::npos ? response
                                                     : response.substr(0, newline));
}

}  // namespace bitcurve::objective
