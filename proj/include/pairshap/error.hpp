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

#ifndef PAIRSHAP_ERROR_HPP_
#define PAIRSHAP_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace pairshap {

// Error classes partition failures the same way the CLI exit codes do.
enum class ErrorKind {
  kConfig = 2,   // malformed flags, JSON or strategy/method definitions
  kData = 3,     // unreadable input data, schema or dimension mismatches
  kRuntime = 4,  // predictor failures, singular solves, I/O during output
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void ThrowConfig(const std::string& message) {
  throw Error(ErrorKind::kConfig, message);
}
[[noreturn]] inline void ThrowData(const std::string& message) {
  throw Error(ErrorKind::kData, message);
}
[[noreturn]] inline void ThrowRuntime(const std::string& message) {
  throw Error(ErrorKind::kRuntime, message);
}

}  // namespace pairshap

#endif  // PAIRSHAP_ERROR_HPP_
