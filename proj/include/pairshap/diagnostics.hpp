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

#ifndef PAIRSHAP_DIAGNOSTICS_HPP_
#define PAIRSHAP_DIAGNOSTICS_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pairshap/data.hpp"
#include "pairshap/model.hpp"
#include "pairshap/shapley.hpp"
#include "pairshap/valuefn.hpp"

namespace pairshap {

// Attribution difference per unit of feature difference for one feature of
// one explicand pair.
struct NormalizedSample {
  std::size_t feature = 0;
  std::size_t pair = 0;  // index into the pair list the samples came from
  std::optional<std::size_t> row_i;
  std::optional<std::size_t> row_j;
  double delta_x = 0.0;    // x_i[k] - x_j[k]
  double numerator = 0.0;  // phi difference (non-pairwise) or phi (pairwise)
  double value = 0.0;      // numerator / delta_x; 0 when degenerate
  bool degenerate = false;  // delta_x == 0
};

// Samples from per-explicand explanations sharing one method. `pairs` index
// into `explanations`. Throws a data error on mixed methods or a pairwise
// explanation in the list.
std::vector<NormalizedSample> NormalizeNonPairwise(
    std::span<const Explanation> explanations,
    std::span<const std::pair<std::size_t, std::size_t>> pairs);

// Samples straight from pairwise explanations (each one is a pair). Throws
// a data error on non-pairwise input.
std::vector<NormalizedSample> NormalizePairwise(std::span<const Explanation> explanations);

// Non-degenerate values of one feature, in sample order.
std::vector<double> FeatureValues(std::span<const NormalizedSample> samples,
                                  std::size_t feature);

struct DistStats {
  double mean = 0.0;
  double std = 0.0;           // sample standard deviation (n-1); 0 when n == 1
  std::optional<double> skew;  // adjusted Fisher-Pearson; needs n >= 3, std > 0
  std::size_t count = 0;
};

// Throws a data error on an empty sample.
DistStats ComputeDistStats(std::span<const double> values);

struct KsResult {
  double d = 0.0;
  double p = 1.0;
};

// Two-sample Kolmogorov-Smirnov test, asymptotic p-value with effective
// size na*nb/(na+nb). Throws a data error if either sample is empty.
KsResult KsTest(std::span<const double> a, std::span<const double> b);

// P(K > lambda) for the Kolmogorov distribution.
double KolmogorovTail(double lambda);

enum class Sign { kPositive, kNegative };

struct FeatureMonotonicity {
  std::size_t feature = 0;
  Sign expected = Sign::kPositive;
  std::size_t n_pairs = 0;
  std::size_t n_dummy = 0;    // degenerate samples
  std::size_t n_matched = 0;
  double fraction = 0.0;      // n_matched / n_pairs (0 when there are no pairs)
};

// Matched means value > 0 for an expected "+", value < 0 for "-", or a
// degenerate sample whose numerator is exactly 0.
FeatureMonotonicity Monotonicity(std::span<const NormalizedSample> samples,
                                 std::size_t feature, Sign expected);

// One entry per audited feature. Throws a config error for an audited
// feature that has no declared sign.
std::vector<FeatureMonotonicity> MonotonicityReport(
    std::span<const NormalizedSample> samples, std::span<const std::size_t> audited,
    std::span<const std::optional<Sign>> signs);

// Among degenerate samples of `feature`, the fraction with a zero
// numerator. Absent when the feature has no degenerate samples.
std::optional<double> DummyRatio(std::span<const NormalizedSample> samples,
                                 std::size_t feature);

// Sign of the Pearson correlation between each feature and `response`;
// absent for constant features or a zero correlation.
std::vector<std::optional<Sign>> CorrelationSigns(const Dataset& data,
                                                  std::span<const double> response);

// Spearman rank correlation with midranks for ties. Absent when fewer than
// two values or either ranking is constant.
std::optional<double> Spearman(std::span<const double> a, std::span<const double> b);

struct PerturbationOptions {
  std::size_t feature = 0;
  std::vector<double> deltas;
  // Perturbed values outside [valid_min, valid_max] are skipped and counted.
  std::optional<double> valid_min;
  std::optional<double> valid_max;
  SolverConfig solver;
  std::size_t jobs = 1;
};

struct PerturbationResult {
  std::vector<std::size_t> row;
  std::vector<double> delta;
  std::vector<double> prediction_delta;   // f(perturbed) - f(original)
  std::vector<double> attribution_delta;
  std::size_t skipped = 0;
};

// Pairwise: attribution delta is phi_k of the pair (perturbed row against
// its original). Other methods: phi_k(perturbed) - phi_k(original) with one
// prepared background. `background` is unused for the pairwise method.
PerturbationResult PerturbationTest(const Dataset& rows, const Predictor& predictor,
                                    const MethodConfig& method, const Dataset& background,
                                    const PerturbationOptions& options);

// "start:stop:step", inclusive, with 0 dropped. Config error when malformed.
std::vector<double> ParseDeltaGrid(const std::string& text);

struct BenchmarkEntry {
  MethodKind method = MethodKind::kPairwise;
  std::vector<double> times_ms;
  double mean_ms = 0.0;
  double std_ms = 0.0;
  std::uint64_t n_evaluations = 0;  // predictor rows per explanation
  std::size_t n_coalitions = 0;
};

struct BenchmarkOptions {
  std::size_t repeats = 50;
  SolverConfig solver;
};

// Times one explanation of `pair.target` per method and repeat. Non-pairwise
// timings include preparing the background. Throws a config error for
// repeats < 2.
std::vector<BenchmarkEntry> Benchmark(std::span<const MethodConfig> methods,
                                      const ExplicandPair& pair, const Dataset& background,
                                      const Predictor& predictor,
                                      const BenchmarkOptions& options);

struct HeatmapCell {
  std::size_t bin = 0;
  double low = 0.0;
  double high = 0.0;
  std::size_t feature = 0;
  std::size_t n_pairs = 0;
  std::optional<double> matched_fraction;
  // Rank correlation of delta_x with phi over the bin's non-degenerate pairs.
  std::optional<double> spearman;
};

// Pairwise explanations bucketed into `bins` equal-width similarity bins;
// cells of empty bins are omitted. Features without a sign get no
// matched_fraction.
std::vector<HeatmapCell> SimilarityHeatmap(std::span<const Explanation> pairwise,
                                           std::span<const std::optional<Sign>> signs,
                                           std::size_t bins);

}  // namespace pairshap

#endif  // PAIRSHAP_DIAGNOSTICS_HPP_
