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

#ifndef PAIRSHAP_PAIRING_HPP_
#define PAIRSHAP_PAIRING_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pairshap/data.hpp"

namespace pairshap {

enum class Metric { kCosine, kEuclidean, kCorrelation };

const char* ToString(Metric metric);
Metric ParseMetric(const std::string& text);

// Euclidean is a distance (smaller is closer); the other two are
// similarities (larger is closer).
inline bool IsDistance(Metric metric) { return metric == Metric::kEuclidean; }

struct MatchCondition {
  std::string feature;
  // nullopt: exact equality; otherwise |target - candidate| <= tolerance.
  std::optional<double> tolerance;
};

struct RandomStrategy {
  std::uint64_t seed = 0;
};

struct SimilarStrategy {
  Metric metric = Metric::kEuclidean;
  bool standardized = true;
};

struct ComparableStrategy {
  std::vector<MatchCondition> conditions;
  Metric fallback_metric = Metric::kEuclidean;
  bool standardized = true;
};

struct PairStrategy {
  std::variant<RandomStrategy, SimilarStrategy, ComparableStrategy> kind;
  // Also exclude background rows that exactly duplicate the target.
  bool exclude_duplicates = false;

  std::string name() const;  // "random" | "similar" | "comparable"
};

// Throws a config error if the strategy violates its invariants
// (empty condition list, negative or non-finite tolerance).
void ValidateStrategy(const PairStrategy& strategy);

struct ExplicandPair {
  std::vector<double> target;
  std::vector<double> reference;
  // dummy_mask[k] is set iff target[k] == reference[k] exactly.
  std::vector<bool> dummy_mask;
  std::optional<double> similarity;
  std::size_t reference_row = 0;
  std::optional<std::size_t> target_row;
  // Comparable strategy found no candidate and fell back to similarity
  // over the full background.
  bool fallback = false;
  // Similarity evaluation hit a degenerate case (zero vector / variance).
  bool degenerate_similarity = false;

  std::size_t n_dummy() const;
};

// Builds a pair from two explicit vectors (perturbation tests, swaps).
ExplicandPair MakePair(std::vector<double> target, std::vector<double> reference,
                       std::size_t reference_row = 0,
                       std::optional<std::size_t> target_row = std::nullopt);

struct SimilarityResult {
  double value = 0.0;
  bool degenerate = false;
};

// Raw metric value between a and b. When `stats` is given, continuous
// features of both vectors are standardized first.
SimilarityResult Similarity(std::span<const double> a, std::span<const double> b,
                            Metric metric, const FeatureStats* stats = nullptr,
                            std::span<const FeatureKind> kinds = {});

// Selects a reference from `background` for `target`. `self_row`, when
// set, is the background index of the target itself and is never chosen.
ExplicandPair SelectPair(std::span<const double> target, const Dataset& background,
                         const PairStrategy& strategy,
                         std::optional<std::size_t> self_row = std::nullopt);

struct PairBatchOptions {
  // Target i is background row i and never pairs with itself.
  bool targets_are_background = false;
  std::size_t jobs = 1;
};

// Order-preserving; the random strategy derives a per-row seed from the
// strategy seed and the row index.
std::vector<ExplicandPair> SelectPairsBatch(const Dataset& targets,
                                            const Dataset& background,
                                            const PairStrategy& strategy,
                                            const PairBatchOptions& options = {});

}  // namespace pairshap

#endif  // PAIRSHAP_PAIRING_HPP_
