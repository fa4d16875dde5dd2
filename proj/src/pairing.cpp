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

#include "pairshap/pairing.hpp"

#include <algorithm>
#include <cmath>

#include "pairshap/error.hpp"
#include "pairshap/random.hpp"
#include "parallel.hpp"

namespace pairshap {

const char* ToString(Metric metric) {
  switch (metric) {
    case Metric::kCosine: return "cosine";
    case Metric::kEuclidean: return "euclidean";
    case Metric::kCorrelation: return "correlation";
  }
  return "?";
}

Metric ParseMetric(const std::string& text) {
  if (text == "cosine") return Metric::kCosine;
  if (text == "euclidean") return Metric::kEuclidean;
  if (text == "correlation") return Metric::kCorrelation;
  ThrowConfig("unknown similarity metric '" + text +
              "' (expected cosine, euclidean or correlation)");
}

std::string PairStrategy::name() const {
  switch (kind.index()) {
    case 0: return "random";
    case 1: return "similar";
    default: return "comparable";
  }
}

void ValidateStrategy(const PairStrategy& strategy) {
  if (const auto* c = std::get_if<ComparableStrategy>(&strategy.kind)) {
    if (c->conditions.empty()) {
      ThrowConfig("comparable strategy needs at least one match condition");
    }
    for (const auto& cond : c->conditions) {
      if (cond.feature.empty()) ThrowConfig("match condition without a feature name");
      if (cond.tolerance && !(std::isfinite(*cond.tolerance) && *cond.tolerance >= 0.0)) {
        ThrowConfig("match condition on '" + cond.feature +
                    "' needs a finite tolerance >= 0");
      }
    }
  }
}

std::size_t ExplicandPair::n_dummy() const {
  return static_cast<std::size_t>(std::count(dummy_mask.begin(), dummy_mask.end(), true));
}

ExplicandPair MakePair(std::vector<double> target, std::vector<double> reference,
                       std::size_t reference_row,
                       std::optional<std::size_t> target_row) {
  if (target.size() != reference.size()) {
    ThrowData("pair vectors differ in length (" + std::to_string(target.size()) +
              " vs " + std::to_string(reference.size()) + ")");
  }
  ExplicandPair pair;
  pair.dummy_mask.resize(target.size());
  for (std::size_t k = 0; k < target.size(); ++k) {
    pair.dummy_mask[k] = target[k] == reference[k];
  }
  pair.target = std::move(target);
  pair.reference = std::move(reference);
  pair.reference_row = reference_row;
  pair.target_row = target_row;
  return pair;
}

namespace {

SimilarityResult RawSimilarity(std::span<const double> a, std::span<const double> b,
                               Metric metric) {
  const std::size_t n = a.size();
  switch (metric) {
    case Metric::kEuclidean: {
      double ss = 0.0;
      for (std::size_t k = 0; k < n; ++k) ss += (a[k] - b[k]) * (a[k] - b[k]);
      return {std::sqrt(ss), false};
    }
    case Metric::kCosine: {
      double dot = 0.0, na = 0.0, nb = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        dot += a[k] * b[k];
        na += a[k] * a[k];
        nb += b[k] * b[k];
      }
      if (na == 0.0 || nb == 0.0) return {0.0, true};
      return {std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0), false};
    }
    case Metric::kCorrelation: {
      if (n < 2) return {0.0, true};
      double ma = 0.0, mb = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        ma += a[k];
        mb += b[k];
      }
      ma /= static_cast<double>(n);
      mb /= static_cast<double>(n);
      double sab = 0.0, saa = 0.0, sbb = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        sab += (a[k] - ma) * (b[k] - mb);
        saa += (a[k] - ma) * (a[k] - ma);
        sbb += (b[k] - mb) * (b[k] - mb);
      }
      if (saa == 0.0 || sbb == 0.0) return {0.0, true};
      return {std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0), false};
    }
  }
  return {0.0, true};
}

// Precomputed per-background state shared by all targets of a batch.
struct Searcher {
  const Dataset& background;
  const PairStrategy& strategy;
  std::optional<FeatureStats> stats;
  Matrix scaled;  // standardized background rows (when requested)
  std::vector<std::size_t> condition_features;

  Searcher(const Dataset& bg, const PairStrategy& s) : background(bg), strategy(s) {
    ValidateStrategy(strategy);
    if (background.n_rows() == 0) ThrowData("background dataset is empty");
    bool standardized = false;
    if (const auto* sim = std::get_if<SimilarStrategy>(&strategy.kind)) {
      standardized = sim->standardized;
    } else if (const auto* cmp = std::get_if<ComparableStrategy>(&strategy.kind)) {
      standardized = cmp->standardized;
      for (const auto& cond : cmp->conditions) {
        condition_features.push_back(background.FeatureIndex(cond.feature));
      }
    }
    if (standardized) {
      stats = ComputeStats(background);
      scaled = Standardize(background, *stats).rows();
    } else {
      scaled = background.rows();
    }
  }

  ExplicandPair Select(std::span<const double> target, std::optional<std::size_t> self_row,
                       std::uint64_t random_seed) const {
    if (target.size() != background.n_features()) {
      ThrowData("target has " + std::to_string(target.size()) +
                " features, background has " + std::to_string(background.n_features()));
    }
    std::vector<std::size_t> candidates;
    candidates.reserve(background.n_rows());
    for (std::size_t r = 0; r < background.n_rows(); ++r) {
      if (self_row && *self_row == r) continue;
      if (strategy.exclude_duplicates) {
        const auto row = background.row(r);
        if (std::equal(row.begin(), row.end(), target.begin())) continue;
      }
      candidates.push_back(r);
    }
    if (candidates.empty()) {
      ThrowData("no candidate reference rows remain after self-exclusion");
    }

    std::optional<std::size_t> chosen;
    std::optional<double> score;
    bool fallback = false;
    bool degenerate = false;

    auto best_by = [&](const std::vector<std::size_t>& pool, Metric metric) {
      std::vector<double> query(target.begin(), target.end());
      if (stats) StandardizeInPlace(query, background.kinds(), *stats);
      std::optional<std::size_t> best;
      double best_value = 0.0;
      bool best_degenerate = false;
      for (std::size_t r : pool) {
        const auto res = RawSimilarity(query, scaled.row(r), metric);
        const bool better = !best || (IsDistance(metric) ? res.value < best_value
                                                         : res.value > best_value);
        if (better) {
          best = r;
          best_value = res.value;
          best_degenerate = res.degenerate;
        }
      }
      chosen = best;
      score = best_value;
      degenerate = best_degenerate;
    };

    if (std::holds_alternative<RandomStrategy>(strategy.kind)) {
      Rng rng(random_seed);
      chosen = candidates[rng.Index(candidates.size())];
    } else if (const auto* sim = std::get_if<SimilarStrategy>(&strategy.kind)) {
      best_by(candidates, sim->metric);
    } else {
      const auto& cmp = std::get<ComparableStrategy>(strategy.kind);
      std::vector<std::size_t> matching;
      for (std::size_t r : candidates) {
        const auto row = background.row(r);
        bool ok = true;
        for (std::size_t c = 0; c < cmp.conditions.size() && ok; ++c) {
          const std::size_t f = condition_features[c];
          const auto& tol = cmp.conditions[c].tolerance;
          ok = tol ? std::abs(row[f] - target[f]) <= *tol : row[f] == target[f];
        }
        if (ok) matching.push_back(r);
      }
      if (matching.empty()) {
        fallback = true;
        best_by(candidates, cmp.fallback_metric);
      } else {
        best_by(matching, cmp.fallback_metric);
      }
    }

    const auto ref = background.row(*chosen);
    ExplicandPair pair = MakePair(std::vector<double>(target.begin(), target.end()),
                                  std::vector<double>(ref.begin(), ref.end()), *chosen,
                                  self_row);
    pair.similarity = score;
    pair.fallback = fallback;
    pair.degenerate_similarity = degenerate;
    return pair;
  }
};

std::uint64_t StrategySeed(const PairStrategy& strategy) {
  if (const auto* r = std::get_if<RandomStrategy>(&strategy.kind)) return r->seed;
  return 0;
}

}  // namespace

SimilarityResult Similarity(std::span<const double> a, std::span<const double> b,
                            Metric metric, const FeatureStats* stats,
                            std::span<const FeatureKind> kinds) {
  if (a.size() != b.size()) {
    ThrowData("similarity of vectors with different lengths (" +
              std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  }
  if (!stats) return RawSimilarity(a, b, metric);
  if (stats->size() != a.size() || kinds.size() != a.size()) {
    ThrowData("standardization statistics do not match the vector length");
  }
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  StandardizeInPlace(sa, kinds, *stats);
  StandardizeInPlace(sb, kinds, *stats);
  return RawSimilarity(sa, sb, metric);
}

ExplicandPair SelectPair(std::span<const double> target, const Dataset& background,
                         const PairStrategy& strategy,
                         std::optional<std::size_t> self_row) {
  Searcher searcher(background, strategy);
  return searcher.Select(target, self_row, StrategySeed(strategy));
}

std::vector<ExplicandPair> SelectPairsBatch(const Dataset& targets,
                                            const Dataset& background,
                                            const PairStrategy& strategy,
                                            const PairBatchOptions& options) {
  if (targets.n_features() != background.n_features()) {
    ThrowData("targets have " + std::to_string(targets.n_features()) +
              " features, background has " + std::to_string(background.n_features()));
  }
  if (options.targets_are_background && targets.n_rows() > background.n_rows()) {
    ThrowData("targets_are_background needs no more targets than background rows");
  }
  Searcher searcher(background, strategy);
  const std::uint64_t seed = StrategySeed(strategy);
  std::vector<ExplicandPair> pairs(targets.n_rows());
  std::vector<std::exception_ptr> errors;
  internal::ParallelFor(
      targets.n_rows(), options.jobs,
      [&](std::size_t i) {
        std::optional<std::size_t> self;
        if (options.targets_are_background) self = i;
        pairs[i] = searcher.Select(targets.row(i), self, Rng::Derive(seed, i));
        pairs[i].target_row = i;
      },
      errors);
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const Error& e) {
      throw Error(e.kind(), "target row " + std::to_string(i) + ": " + e.what());
    }
  }
  return pairs;
}

}  // namespace pairshap
