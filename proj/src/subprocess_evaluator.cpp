// Copyright 2026 The dnanas Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>
#include <thread>

#include "dnanas/trainer_bridge.hpp"

extern char** environ;

namespace dnanas {

namespace {

constexpr std::size_t kDiagnosticsTail = 2000;

class Fd {
public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(Fd&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  Fd& operator=(Fd&& other) noexcept {
    if (this != &other) {
      reset();
      fd_ = std::exchange(other.fd_, -1);
    }
    return *this;
  }
  ~Fd() { reset(); }

  int get() const noexcept { return fd_; }
  void reset() noexcept {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

private:
  int fd_ = -1;
};

[[noreturn]] void throw_errno(const std::string& what) {
  throw std::system_error(errno, std::generic_category(), what);
}

std::pair<Fd, Fd> make_pipe() {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) throw_errno("pipe2");
  return {Fd(fds[0]), Fd(fds[1])};
}

bool write_all(int fd, const std::string& data) {
  std::size_t done = 0;
  while (done < data.size()) {
    const auto n = ::write(fd, data.data() + done, data.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    done += static_cast<std::size_t>(n);
  }
  return true;
}

class SubprocessSession : public EvalSession {
public:
  SubprocessSession(const std::string& command, const EvalRequest& req) : model_id_(req.model_id) {
    char stderr_template[] = "/tmp/dnanas-trainer-XXXXXX";
    const int err_fd = ::mkostemp(stderr_template, O_CLOEXEC);
    if (err_fd < 0) throw_errno("mkostemp");
    stderr_fd_ = Fd(err_fd);
    ::unlink(stderr_template);

    auto [child_in, to_child] = make_pipe();
    auto [from_child, child_out] = make_pipe();

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, child_in.get(), STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, child_out.get(), STDOUT_FILENO);
    posix_spawn_file_actions_adddup2(&actions, stderr_fd_.get(), STDERR_FILENO);
    std::string sh = "sh", dash_c = "-c", cmd = command;
    char* argv[] = {sh.data(), dash_c.data(), cmd.data(), nullptr};
    const int rc = ::posix_spawn(&pid_, "/bin/sh", &actions, nullptr, argv, environ);
    posix_spawn_file_actions_destroy(&actions);
    if (rc != 0) {
      errno = rc;
      throw_errno("posix_spawn " + command);
    }
    to_child_ = std::move(to_child);
    from_child_ = std::move(from_child);
    // child_in / child_out close here so EOF propagates when the child exits.

    if (!write_all(to_child_.get(), to_wire(req).dump() + "\n")) {
      outcome_ = failure("could not send request to trainer");
    }
  }

  ~SubprocessSession() override {
    to_child_.reset();
    from_child_.reset();
    reap(std::chrono::seconds(5));
  }

  EvalMessage next() override {
    while (!outcome_) {
      auto line = read_line();
      if (!line) {
        outcome_ = failure("trainer exited without a terminal message");
        break;
      }
      if (line->find_first_not_of(" \t\r") == std::string::npos) continue;
      nlohmann::json msg;
      try {
        msg = nlohmann::json::parse(*line);
      } catch (const nlohmann::json::exception&) {
        outcome_ = failure("malformed line from trainer: " + line->substr(0, 200));
        break;
      }
      try {
        const auto type = msg.at("type").get<std::string>();
        if (type == "epoch") {
          return EvalEvent{msg.value("model_id", model_id_), msg.at("epoch").get<int>(),
                           msg.at("val_acc").get<double>(), msg.at("loss").get<double>()};
        }
        if (type == "done") {
          auto status = status_from_string(msg.at("status").get<std::string>());
          if (!status) throw std::invalid_argument("unknown status");
          EvalOutcome outcome{*status, msg.value("diagnostics", std::string{}), std::nullopt};
          if (msg.contains("test_acc") && !msg["test_acc"].is_null()) {
            outcome.test_accuracy = msg["test_acc"].get<double>();
          }
          if (outcome.status == EvalStatus::Failed && outcome.diagnostics.empty()) {
            outcome.diagnostics = stderr_tail();
          }
          outcome_ = std::move(outcome);
          break;
        }
        // Unknown message types are ignored for forward compatibility.
      } catch (const std::exception& e) {
        outcome_ = failure(std::string("bad message from trainer: ") + e.what());
      }
    }
    return *outcome_;
  }

  void kill() override {
    if (to_child_.get() >= 0) write_all(to_child_.get(), "{\"type\":\"kill\"}\n");
  }

private:
  std::optional<std::string> read_line() {
    for (;;) {
      if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return line;
      }
      if (eof_) {
        if (buffer_.empty()) return std::nullopt;
        return std::exchange(buffer_, {});
      }
      char chunk[4096];
      const auto n = ::read(from_child_.get(), chunk, sizeof chunk);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) {
        eof_ = true;
        continue;
      }
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  EvalOutcome failure(const std::string& what) {
    std::string diagnostics = what;
    to_child_.reset();
    if (auto status = reap(std::chrono::seconds(5))) diagnostics += "; " + *status;
    if (auto tail = stderr_tail(); !tail.empty()) diagnostics += "\nstderr:\n" + tail;
    return {EvalStatus::Failed, diagnostics, std::nullopt};
  }

  /// Waits for the child, escalating to SIGTERM then SIGKILL after `grace`.
  std::optional<std::string> reap(std::chrono::milliseconds grace) {
    if (pid_ <= 0) return std::nullopt;
    int status = 0;
    const auto deadline = std::chrono::steady_clock::now() + grace;
    int signal_sent = 0;
    for (;;) {
      const pid_t r = ::waitpid(pid_, &status, WNOHANG);
      if (r == pid_ || (r < 0 && errno != EINTR)) break;
      if (std::chrono::steady_clock::now() >= deadline) {
        if (signal_sent == 0) {
          ::kill(pid_, SIGTERM);
          signal_sent = SIGTERM;
        } else if (signal_sent == SIGTERM) {
          ::kill(pid_, SIGKILL);
          signal_sent = SIGKILL;
        }
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    pid_ = -1;
    if (WIFEXITED(status)) return "exit status " + std::to_string(WEXITSTATUS(status));
    if (WIFSIGNALED(status)) return "killed by signal " + std::to_string(WTERMSIG(status));
    return std::nullopt;
  }

  std::string stderr_tail() const {
    if (stderr_fd_.get() < 0) return {};
    const off_t size = ::lseek(stderr_fd_.get(), 0, SEEK_END);
    if (size <= 0) return {};
    const off_t start = size > static_cast<off_t>(kDiagnosticsTail)
                            ? size - static_cast<off_t>(kDiagnosticsTail)
                            : 0;
    std::string out(static_cast<std::size_t>(size - start), '\0');
    const auto n = ::pread(stderr_fd_.get(), out.data(), out.size(), start);
    out.resize(n > 0 ? static_cast<std::size_t>(n) : 0);
    return out;
  }

  int model_id_;
  pid_t pid_ = -1;
  Fd to_child_;
  Fd from_child_;
  Fd stderr_fd_;
  std::string buffer_;
  bool eof_ = false;
  std::optional<EvalOutcome> outcome_;
};

}  // namespace

SubprocessEvaluator::SubprocessEvaluator(std::string command) : command_(std::move(command)) {
  std::signal(SIGPIPE, SIG_IGN);
}

std::unique_ptr<EvalSession> SubprocessEvaluator::submit(const EvalRequest& req) {
  return std::make_unique<SubprocessSession>(command_, req);
}

}  // namespace dnanas
