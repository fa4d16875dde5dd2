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

#ifndef PAIRSHAP_VALUEFN_HPP_
#define PAIRSHAP_VALUEFN_HPP_

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pairshap/data.hpp"
#include "pairshap/matrix.hpp"
#include "pairshap/model.hpp"
#include "pairshap/pairing.hpp"

namespace pairshap {

// Feature subset; a set bit means the feature takes the target's value.
class Coalition {
 public:
  Coalition() = default;
  explicit Coalition(std::size_t n_features) : bits_(n_features, 0) {}

  static Coalition FromMask(std::uint64_t mask, std::size_t n_features);
  static Coalition Full(std::size_t n_features);

  std::size_t n_features() const noexcept { return bits_.size(); }
  bool contains(std::size_t k) const { return bits_[k] != 0; }
  void set(std::size_t k, bool present = true) { bits_[k] = present ? 1 : 0; }
  std::size_t count() const;
  Coalition Complement() const;
  const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }

  friend bool operator==(const Coalition&, const Coalition&) = default;
  friend auto operator<=>(const Coalition&, const Coalition&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

// Anything the Shapley solvers can query: v(S) for batches of coalitions
// over n_players() players. Implementations must be thread-safe.
class CoalitionGame {
 public:
  virtual ~CoalitionGame() = default;
  virtual std::size_t n_players() const = 0;
  virtual std::vector<double> Values(std::span<const Coalition> coalitions) const = 0;
};

enum class MethodKind {
  kPairwise,
  kBaselineZero,
  kBaselineMedian,
  kUniform,
  kMarginalAll,
  kMarginalKmeans,
  kConditionalEmpirical,
};

// Short tags used in files and on the command line: pairwise, b0, bm, uf,
// ma, mk, ca.
const char* MethodTag(MethodKind kind);
MethodKind ParseMethodTag(const std::string& tag);
inline bool IsPairwise(MethodKind kind) { return kind == MethodKind::kPairwise; }

struct MethodConfig {
  MethodKind kind = MethodKind::kPairwise;
  std::size_t n_samples = 100;     // uf: sampled rows; ca: nearest rows kept
  std::size_t n_background = 100;  // ma: background rows sampled
  std::size_t k = 10;              // mk: clusters
  std::optional<double> sigma;     // ca: kernel bandwidth (default 0.1*sqrt|S|)
  std::uint64_t seed = 0;
};

// Throws a config error on zero counts or a non-positive bandwidth.
void ValidateMethod(const MethodConfig& config);

struct WeightedRows {
  Matrix rows;
  std::vector<double> weights;
};

// Lloyd's algorithm on standardized features, seeded with k-means++.
// Returned centroids are member means in the original feature space, with
// binary features snapped to the cluster majority; weights are member
// counts.
WeightedRows KMeansSummary(const Dataset& background, std::size_t k,
                           std::uint64_t seed, std::size_t max_iterations = 100);

// Background-derived state for a non-pairwise removal method. Built once
// and shared read-only by every explanation that uses it.
class PreparedMethod {
 public:
  static std::shared_ptr<const PreparedMethod> Prepare(const MethodConfig& config,
                                                       const Dataset& background);

  const MethodConfig& config() const noexcept { return config_; }
  MethodKind kind() const noexcept { return config_.kind; }
  std::size_t n_features() const noexcept { return n_features_; }

  // Replacement rows for absent features and their normalized weights
  // (b0, bm, uf, ma, mk).
  const Matrix& fill_rows() const noexcept { return fill_rows_; }
  const std::vector<double>& fill_weights() const noexcept { return fill_weights_; }

  // Conditional method state.
  const Matrix& background_rows() const noexcept { return background_rows_; }
  const Matrix& scaled_background() const noexcept { return scaled_background_; }
  const FeatureStats& stats() const noexcept { return stats_; }
  const std::vector<FeatureKind>& kinds() const noexcept { return kinds_; }

 private:
  PreparedMethod() = default;

  MethodConfig config_;
  std::size_t n_features_ = 0;
  Matrix fill_rows_;
  std::vector<double> fill_weights_;
  Matrix background_rows_;
  Matrix scaled_background_;
  FeatureStats stats_;
  std::vector<FeatureKind> kinds_;
};

// Rows whose weighted mean prediction is v(S); weights sum to 1.
struct HybridBatch {
  Matrix rows;
  std::vector<double> weights;
};

// v(S) for one explicand under one removal method. The only mutable state
// is the atomic count of predictor rows issued.
class ValueFunction final : public CoalitionGame {
 public:
  // Pairwise: absent features take the pair's reference values.
  ValueFunction(const ExplicandPair& pair, const Predictor& predictor);
  // Any prepared non-pairwise method.
  ValueFunction(std::shared_ptr<const PreparedMethod> method,
                const Predictor& predictor, std::vector<double> target);

  std::size_t n_players() const override { return target_.size(); }
  std::vector<double> Values(std::span<const Coalition> coalitions) const override;

  double Value(const Coalition& s) const;
  HybridBatch HybridRows(const Coalition& s) const;

  MethodKind kind() const noexcept { return kind_; }
  std::span<const double> target() const noexcept { return target_; }
  std::span<const double> reference() const noexcept { return reference_; }
  const Predictor& predictor() const noexcept { return predictor_; }
  std::uint64_t evaluations() const noexcept { return evaluations_.load(); }

 private:
  void AppendHybridRows(const Coalition& s, Matrix& rows,
                        std::vector<double>& weights) const;
  void ConditionalRows(const Coalition& s, Matrix& rows,
                       std::vector<double>& weights) const;
  void CheckCoalition(const Coalition& s) const;

  MethodKind kind_;
  const Predictor& predictor_;
  std::shared_ptr<const PreparedMethod> method_;
  std::vector<double> target_;
  std::vector<double> reference_;        // pairwise only
  std::vector<double> scaled_target_;    // conditional only
  mutable std::atomic<std::uint64_t> evaluations_{0};
};

}  // namespace pairshap

#endif  // PAIRSHAP_VALUEFN_HPP_
