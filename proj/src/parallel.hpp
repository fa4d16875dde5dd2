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

#ifndef PAIRSHAP_SRC_PARALLEL_HPP_
#define PAIRSHAP_SRC_PARALLEL_HPP_

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace pairshap::internal {

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Work is handed out by
// an atomic counter; results must be written to per-index slots so the
// outcome does not depend on scheduling. The exception thrown for each
// failing index is kept in `errors` (same length as n).
template <typename Fn>
void ParallelFor(std::size_t n, std::size_t jobs, Fn&& fn,
                 std::vector<std::exception_ptr>& errors) {
  errors.assign(n, nullptr);
  if (n == 0) return;
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (jobs == 1) {
    worker();
    return;
  }
  std::vector<std::jthread> threads;
  threads.reserve(jobs - 1);
  for (std::size_t t = 0; t + 1 < jobs; ++t) threads.emplace_back(worker);
  worker();
}

}  // namespace pairshap::internal

#endif  // PAIRSHAP_SRC_PARALLEL_HPP_
