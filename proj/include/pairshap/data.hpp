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

#ifndef PAIRSHAP_DATA_HPP_
#define PAIRSHAP_DATA_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pairshap/matrix.hpp"

namespace pairshap {

enum class FeatureKind { kContinuous, kBinary };

const char* ToString(FeatureKind kind);
FeatureKind ParseFeatureKind(const std::string& text);

// Column-named feature matrix. Immutable after construction; the constructor
// enforces shape, finiteness, unique names and the {0,1} rule for binary
// columns.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<std::string> names, std::vector<FeatureKind> kinds,
          Matrix rows, std::optional<std::vector<double>> target = {});

  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::vector<FeatureKind>& kinds() const noexcept { return kinds_; }
  const Matrix& rows() const noexcept { return rows_; }
  const std::optional<std::vector<double>>& target() const noexcept {
    return target_;
  }

  std::size_t n_rows() const noexcept { return rows_.rows(); }
  std::size_t n_features() const noexcept { return names_.size(); }
  std::span<const double> row(std::size_t i) const { return rows_.row(i); }

  // Index of a feature by name; throws a data error when absent.
  std::size_t FeatureIndex(const std::string& name) const;
  std::optional<std::size_t> FindFeature(const std::string& name) const;

  // Copy restricted to the given rows, in the given order.
  Dataset Subset(std::span<const std::size_t> row_indices) const;

  // Copy whose target column was discarded.
  Dataset WithoutTarget() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<FeatureKind> kinds_;
  Matrix rows_;
  std::optional<std::vector<double>> target_;
};

struct FeatureStats {
  std::vector<std::string> names;
  std::vector<double> min;
  std::vector<double> max;
  std::vector<double> mean;
  std::vector<double> median;
  std::vector<double> std;  // population standard deviation

  std::size_t size() const noexcept { return names.size(); }
};

struct CsvOptions {
  std::optional<std::string> target_column;
  // Explicit kinds by feature name; inference applies to the rest.
  std::map<std::string, FeatureKind> kind_overrides;
};

Dataset LoadCsv(const std::string& path, const CsvOptions& options = {});
Dataset ParseCsv(const std::string& text, const CsvOptions& options = {},
                 const std::string& source_name = "<memory>");

// Writes the features (and the target as a trailing column named
// `target_name`, when present) with 17 significant digits.
void WriteCsv(const Dataset& data, const std::string& path,
              const std::string& target_name = "target");
std::string FormatCsv(const Dataset& data,
                      const std::string& target_name = "target");

FeatureStats ComputeStats(const Dataset& data);

// (v - mean) / std for continuous features, 0 where std == 0; binary columns
// pass through unchanged.
Dataset Standardize(const Dataset& data, const FeatureStats& stats);

// Per-value version used by pairing and the conditional value function.
void StandardizeInPlace(std::span<double> values,
                        std::span<const FeatureKind> kinds,
                        const FeatureStats& stats);

// Synthetic generator ------------------------------------------------------

struct SyntheticFeature {
  std::string name;
  FeatureKind kind = FeatureKind::kContinuous;
  // Continuous: uniform on [low, high]. When `source` is set the value is
  // instead scale * source + offset + uniform jitter on [-jitter, jitter].
  double low = 0.0;
  double high = 1.0;
  // Binary: Bernoulli(p). When `source` is set the bit is
  // (source > threshold) flipped with probability p_flip.
  double p = 0.5;
  std::optional<std::string> source;
  double scale = 1.0;
  double offset = 0.0;
  double jitter = 0.0;
  double threshold = 0.5;
  double p_flip = 0.0;
};

struct SyntheticSpec {
  std::vector<SyntheticFeature> features;
  std::vector<double> weights;  // one per feature
  double intercept = 0.0;
  double noise_std = 0.0;

  // n continuous U[0,1] features x0..x{n-1}, unit weights, no noise.
  static SyntheticSpec Uniform(std::size_t n_features);
};

SyntheticSpec ParseSyntheticSpec(const std::string& json_text);
std::string SyntheticSpecToJson(const SyntheticSpec& spec);

Dataset GenerateSynthetic(std::size_t n_rows, const SyntheticSpec& spec,
                          std::uint64_t seed);

}  // namespace pairshap

#endif  // PAIRSHAP_DATA_HPP_
