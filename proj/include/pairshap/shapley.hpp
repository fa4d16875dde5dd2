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

#ifndef PAIRSHAP_SHAPLEY_HPP_
#define PAIRSHAP_SHAPLEY_HPP_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pairshap/data.hpp"
#include "pairshap/error.hpp"
#include "pairshap/model.hpp"
#include "pairshap/pairing.hpp"
#include "pairshap/valuefn.hpp"

namespace pairshap {

enum class SolverMode {
  kAuto,    // exact when the effective player count is <= exact_threshold
  kExact,   // direct summation over all coalitions
  kKernel,  // weighted least squares; full enumeration when it fits the budget
};

const char* ToString(SolverMode mode);
SolverMode ParseSolverMode(const std::string& text);

struct SolverConfig {
  SolverMode mode = SolverMode::kAuto;
  // Coalitions (besides the empty and full ones) the sampled kernel solver
  // may evaluate.
  std::size_t n_coalitions = 2048;
  std::uint64_t seed = 0;
  // Pairwise only: drop features equal in target and reference.
  bool prune_dummies = true;
  std::size_t exact_threshold = 14;
};

// Config error for a zero budget or an exact threshold above 24.
void ValidateSolver(const SolverConfig& config);

// (n-1) / (C(n,s) * s * (n-s)) for 0 < s < n; 0 otherwise.
double ShapleyKernelWeight(std::size_t n, std::size_t s);

struct Attribution {
  double phi0 = 0.0;        // v(empty)
  std::vector<double> phi;  // one per player
  double prediction = 0.0;  // v(full)
  std::size_t n_coalitions = 0;  // distinct coalitions evaluated
  std::string solver;            // "exact" | "kernel_full" | "kernel_sampled"
  std::vector<std::string> warnings;
  // Set after a singular kernel solve: groups of players whose membership
  // always coincided in the evaluated coalitions.
  std::vector<std::vector<std::size_t>> indistinguishable;
};

// Shapley values by direct summation over all 2^n coalitions. Throws a
// config error when n exceeds `exact_threshold`.
Attribution ExactShapley(const CoalitionGame& game, std::size_t exact_threshold = 14);

// KernelSHAP with efficiency imposed by eliminating the last player.
// Enumerates every coalition when 2^n - 2 <= n_coalitions, otherwise draws
// complement-paired coalitions stratified by size. A singular system falls
// back to the minimum-norm solution and records a warning naming the
// features the coalitions cannot tell apart.
Attribution KernelShap(const CoalitionGame& game, const SolverConfig& config);

// Dispatch on config.mode.
Attribution Solve(const CoalitionGame& game, const SolverConfig& config);

struct Explanation {
  double phi0 = 0.0;
  std::vector<double> phi;
  double prediction = 0.0;
  MethodKind method = MethodKind::kPairwise;
  std::vector<double> target;
  std::vector<double> reference;               // pairwise only
  std::optional<std::size_t> target_row;
  std::optional<std::size_t> reference_row;    // pairwise only
  std::vector<bool> dummy_mask;                // pairwise only
  std::optional<double> similarity;
  bool fallback = false;
  std::uint64_t n_evaluations = 0;  // predictor rows issued
  std::size_t n_coalitions = 0;
  double wall_time_ms = 0.0;
  std::string solver;
  std::vector<std::string> warnings;

  // phi0 + sum(phi) - prediction.
  double EfficiencyResidual() const;
};

// Pairwise explanation. With prune_dummies the game is reduced to the
// features that differ; pruned features get exactly 0.
Explanation PruneAndSolve(const ExplicandPair& pair, const Predictor& predictor,
                          const SolverConfig& config);

Explanation ExplainWithMethod(std::shared_ptr<const PreparedMethod> method,
                              const Predictor& predictor, std::span<const double> target,
                              const SolverConfig& config,
                              std::optional<std::size_t> target_row = std::nullopt);

// Per-row failures of a batch. kind() is the kind of the first failure.
class BatchError : public Error {
 public:
  BatchError(ErrorKind kind, std::string message,
             std::vector<std::pair<std::size_t, std::string>> failures)
      : Error(kind, std::move(message)), failures_(std::move(failures)) {}
  const std::vector<std::pair<std::size_t, std::string>>& failures() const noexcept {
    return failures_;
  }

 private:
  std::vector<std::pair<std::size_t, std::string>> failures_;
};

std::vector<Explanation> ExplainPairs(std::span<const ExplicandPair> pairs,
                                      const Predictor& predictor,
                                      const SolverConfig& config, std::size_t jobs = 1);

std::vector<Explanation> ExplainRows(const Dataset& targets,
                                     std::shared_ptr<const PreparedMethod> method,
                                     const Predictor& predictor,
                                     const SolverConfig& config, std::size_t jobs = 1);

struct BatchOptions {
  std::size_t jobs = 1;
  // Targets are the background itself (pairing excludes row i for target i).
  bool targets_are_background = false;
};

// Pairing (for the pairwise method) or background preparation, then one
// explanation per target row, in order.
std::vector<Explanation> ExplainBatch(const Dataset& targets, const Dataset& background,
                                      const Predictor& predictor,
                                      const PairStrategy& strategy,
                                      const MethodConfig& method,
                                      const SolverConfig& solver,
                                      const BatchOptions& options = {});

}  // namespace pairshap

#endif  // PAIRSHAP_SHAPLEY_HPP_
