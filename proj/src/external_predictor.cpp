// Copyright 2026 The pairshap Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>

#include "pairshap/error.hpp"
#include "pairshap/model.hpp"

namespace pairshap {

// A socketpair is used instead of pipes so writes to a dead child can pass
// MSG_NOSIGNAL and surface as errors rather than SIGPIPE.
struct ExternalPredictor::Process {
  pid_t pid = -1;
  int fd = -1;
  std::string buffer;
  bool broken = false;

  ~Process() {
    if (fd >= 0) ::close(fd);
    if (pid > 0) {
      int status = 0;
      // Closing the socket sends EOF; give the child a moment, then insist.
      for (int i = 0; i < 50; ++i) {
        if (::waitpid(pid, &status, WNOHANG) == pid) {
          ::kill(-pid, SIGKILL);
          return;
        }
        ::usleep(2000);
      }
      ::kill(-pid, SIGKILL);
      ::waitpid(pid, &status, 0);
    }
  }
};

namespace {

std::string Trimmed(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) {
    s.pop_back();
  }
  std::size_t b = 0;
  while (b < s.size() && (s[b] == ' ' || s[b] == '\t')) ++b;
  return s.substr(b);
}

}  // namespace

ExternalPredictor::ExternalPredictor(const std::string& command,
                                     ExternalPredictorOptions options)
    : command_(command), options_(options), process_(std::make_unique<Process>()) {
  if (options_.batch_size == 0) ThrowConfig("external predictor batch size must be >= 1");
  int fds[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, fds) != 0) {
    ThrowRuntime(std::string("external predictor: socketpair failed: ") +
                 std::strerror(errno));
  }
  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(fds[0]);
    ::close(fds[1]);
    ThrowRuntime(std::string("external predictor: fork failed: ") +
                 std::strerror(errno));
  }
  if (pid == 0) {
    // Own process group, so teardown also reaches whatever the shell spawned.
    ::setpgid(0, 0);
    ::dup2(fds[1], STDIN_FILENO);
    ::dup2(fds[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  ::close(fds[1]);
  process_->pid = pid;
  process_->fd = fds[0];

  const std::string hello = Trimmed(ReadLine("handshake"));
  unsigned long count = 0;
  if (hello.rfind("READY ", 0) != 0 ||
      std::sscanf(hello.c_str() + 6, "%lu", &count) != 1 || count == 0) {
    ThrowRuntime("external predictor: expected 'READY <feature_count>' handshake, got '" +
                 hello + "'");
  }
  n_features_ = count;
}

ExternalPredictor::~ExternalPredictor() = default;

std::string ExternalPredictor::ReadLine(const char* context) const {
  auto& proc = *process_;
  const auto deadline = std::chrono::steady_clock::now() + options_.timeout;
  for (;;) {
    const auto nl = proc.buffer.find('\n');
    if (nl != std::string::npos) {
      std::string line = proc.buffer.substr(0, nl);
      proc.buffer.erase(0, nl + 1);
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      proc.broken = true;
      ThrowRuntime(std::string("external predictor: timeout waiting for ") + context);
    }
    pollfd pfd{proc.fd, POLLIN, 0};
    const int rc = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (rc < 0) {
      if (errno == EINTR) continue;
      proc.broken = true;
      ThrowRuntime(std::string("external predictor: poll failed: ") + std::strerror(errno));
    }
    if (rc == 0) continue;
    char chunk[4096];
    const ssize_t got = ::read(proc.fd, chunk, sizeof chunk);
    if (got < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      proc.broken = true;
      ThrowRuntime(std::string("external predictor: read failed: ") + std::strerror(errno));
    }
    if (got == 0) {
      proc.broken = true;
      ThrowRuntime(std::string("external predictor: process closed its output during ") +
                   context);
    }
    proc.buffer.append(chunk, static_cast<std::size_t>(got));
  }
}

void ExternalPredictor::SendAll(const std::string& payload) const {
  auto& proc = *process_;
  std::size_t sent = 0;
  while (sent < payload.size()) {
    const ssize_t n = ::send(proc.fd, payload.data() + sent, payload.size() - sent,
                             MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      proc.broken = true;
      ThrowRuntime(std::string("external predictor: write failed: ") + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(n);
  }
}

void ExternalPredictor::EvaluateChunk(const Matrix& batch, std::size_t begin,
                                      std::size_t end, std::span<double> out) const {
  const std::size_t count = end - begin;
  std::string payload = "PREDICT " + std::to_string(count) + "\n";
  char num[32];
  for (std::size_t r = begin; r < end; ++r) {
    const auto row = batch.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) payload.push_back(',');
      std::snprintf(num, sizeof num, "%.17g", row[c]);
      payload += num;
    }
    payload.push_back('\n');
  }
  SendAll(payload);
  for (std::size_t i = 0; i < count; ++i) {
    std::string line;
    try {
      line = Trimmed(ReadLine("prediction reply"));
    } catch (const Error& e) {
      ThrowRuntime(std::string(e.what()) + " (reply-count mismatch: received " +
                   std::to_string(i) + " of " + std::to_string(count) + " lines)");
    }
    double v = 0.0;
    const char* first = line.data();
    const char* last = line.data() + line.size();
    if (first != last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (line.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
      process_->broken = true;
      ThrowRuntime("external predictor: reply line " + std::to_string(i + 1) +
                   " is not a number: '" + line + "'");
    }
    if (options_.output_kind == OutputKind::kProbability && (v < 0.0 || v > 1.0)) {
      process_->broken = true;
      ThrowRuntime("external predictor: reply line " + std::to_string(i + 1) +
                   " is outside [0,1] for a probability output");
    }
    out[begin + i] = v;
  }
}

void ExternalPredictor::Evaluate(const Matrix& batch, std::span<double> out) const {
  std::lock_guard<std::mutex> lock(mutex_);
  if (process_->broken) {
    ThrowRuntime("external predictor is unusable after an earlier protocol failure");
  }
  for (std::size_t begin = 0; begin < batch.rows(); begin += options_.batch_size) {
    const std::size_t end = std::min(batch.rows(), begin + options_.batch_size);
    EvaluateChunk(batch, begin, end, out);
  }
}

}  // namespace pairshap
