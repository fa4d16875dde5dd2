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

#include "pairshap/valuefn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pairshap/error.hpp"
#include "pairshap/random.hpp"

namespace pairshap {

namespace {

// Upper bound on rows handed to the predictor in one call.
constexpr std::size_t kMaxRowsPerBatch = 1 << 16;

}  // namespace

Coalition Coalition::FromMask(std::uint64_t mask, std::size_t n_features) {
  Coalition s(n_features);
  for (std::size_t k = 0; k < n_features && k < 64; ++k) {
    s.bits_[k] = static_cast<std::uint8_t>((mask >> k) & 1U);
  }
  return s;
}

Coalition Coalition::Full(std::size_t n_features) {
  Coalition s(n_features);
  std::fill(s.bits_.begin(), s.bits_.end(), std::uint8_t{1});
  return s;
}

std::size_t Coalition::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

Coalition Coalition::Complement() const {
  Coalition s(bits_.size());
  for (std::size_t k = 0; k < bits_.size(); ++k) s.bits_[k] = bits_[k] ? 0 : 1;
  return s;
}

const char* MethodTag(MethodKind kind) {
  switch (kind) {
    case MethodKind::kPairwise: return "pairwise";
    case MethodKind::kBaselineZero: return "b0";
    case MethodKind::kBaselineMedian: return "bm";
    case MethodKind::kUniform: return "uf";
    case MethodKind::kMarginalAll: return "ma";
    case MethodKind::kMarginalKmeans: return "mk";
    case MethodKind::kConditionalEmpirical: return "ca";
  }
  return "?";
}

MethodKind ParseMethodTag(const std::string& tag) {
  for (auto kind : {MethodKind::kPairwise, MethodKind::kBaselineZero,
                    MethodKind::kBaselineMedian, MethodKind::kUniform,
                    MethodKind::kMarginalAll, MethodKind::kMarginalKmeans,
                    MethodKind::kConditionalEmpirical}) {
    if (tag == MethodTag(kind)) return kind;
  }
  ThrowConfig("unknown removal method '" + tag +
              "' (expected pairwise, b0, bm, uf, ma, mk or ca)");
}

void ValidateMethod(const MethodConfig& config) {
  if (config.n_samples == 0) ThrowConfig("n_samples must be >= 1");
  if (config.n_background == 0) ThrowConfig("n_background must be >= 1");
  if (config.k == 0) ThrowConfig("k must be >= 1");
  if (config.sigma && !(std::isfinite(*config.sigma) && *config.sigma > 0.0)) {
    ThrowConfig("sigma must be finite and > 0");
  }
}

// Prepared state ----------------------------------------------------------

std::shared_ptr<const PreparedMethod> PreparedMethod::Prepare(
    const MethodConfig& config, const Dataset& background) {
  ValidateMethod(config);
  if (config.kind == MethodKind::kPairwise) {
    ThrowConfig("the pairwise method takes an explicand pair, not a prepared background");
  }
  if (config.kind != MethodKind::kBaselineZero && background.n_rows() == 0) {
    ThrowData("background dataset is empty");
  }
  std::shared_ptr<PreparedMethod> m(new PreparedMethod());
  m->config_ = config;
  m->n_features_ = background.n_features();
  m->kinds_ = background.kinds();
  const std::size_t n = background.n_features();

  auto single = [&](std::vector<double> values) {
    m->fill_rows_ = Matrix(1, n, std::move(values));
    m->fill_weights_ = {1.0};
  };
  auto uniform_weights = [&](std::size_t count) {
    m->fill_weights_.assign(count, 1.0 / static_cast<double>(count));
  };

  switch (config.kind) {
    case MethodKind::kBaselineZero:
      single(std::vector<double>(n, 0.0));
      break;
    case MethodKind::kBaselineMedian:
      m->stats_ = ComputeStats(background);
      single(m->stats_.median);
      break;
    case MethodKind::kUniform: {
      m->stats_ = ComputeStats(background);
      Rng rng(config.seed);
      m->fill_rows_ = Matrix(config.n_samples, n);
      for (std::size_t r = 0; r < config.n_samples; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
          if (m->kinds_[c] == FeatureKind::kBinary) {
            // Observed positive rate, so predictor inputs stay in {0,1}.
            m->fill_rows_(r, c) = rng.Bernoulli(m->stats_.mean[c]) ? 1.0 : 0.0;
          } else {
            m->fill_rows_(r, c) = rng.Uniform(m->stats_.min[c], m->stats_.max[c]);
          }
        }
      }
      uniform_weights(config.n_samples);
      break;
    }
    case MethodKind::kMarginalAll: {
      Rng rng(config.seed);
      auto picks = rng.Sample(background.n_rows(), config.n_background);
      m->fill_rows_ = background.Subset(picks).rows();
      uniform_weights(picks.size());
      break;
    }
    case MethodKind::kMarginalKmeans: {
      auto summary = KMeansSummary(background, config.k, config.seed);
      const double total = std::accumulate(summary.weights.begin(),
                                           summary.weights.end(), 0.0);
      m->fill_rows_ = std::move(summary.rows);
      m->fill_weights_.clear();
      for (double w : summary.weights) m->fill_weights_.push_back(w / total);
      break;
    }
    case MethodKind::kConditionalEmpirical:
      m->stats_ = ComputeStats(background);
      m->background_rows_ = background.rows();
      m->scaled_background_ = Standardize(background, m->stats_).rows();
      break;
    case MethodKind::kPairwise:
      break;
  }
  return m;
}

// Value function ------------------------------------------------------------

ValueFunction::ValueFunction(const ExplicandPair& pair, const Predictor& predictor)
    : kind_(MethodKind::kPairwise),
      predictor_(predictor),
      target_(pair.target),
      reference_(pair.reference) {
  if (target_.size() != reference_.size()) {
    ThrowData("pair target and reference differ in length");
  }
  if (target_.size() != predictor_.n_features()) {
    ThrowData("pair has " + std::to_string(target_.size()) +
              " features, predictor expects " + std::to_string(predictor_.n_features()));
  }
}

ValueFunction::ValueFunction(std::shared_ptr<const PreparedMethod> method,
                             const Predictor& predictor, std::vector<double> target)
    : kind_(method->kind()),
      predictor_(predictor),
      method_(std::move(method)),
      target_(std::move(target)) {
  if (target_.size() != method_->n_features()) {
    ThrowData("target has " + std::to_string(target_.size()) +
              " features, method background has " +
              std::to_string(method_->n_features()));
  }
  if (target_.size() != predictor_.n_features()) {
    ThrowData("target has " + std::to_string(target_.size()) +
              " features, predictor expects " + std::to_string(predictor_.n_features()));
  }
  if (kind_ == MethodKind::kConditionalEmpirical) {
    scaled_target_ = target_;
    StandardizeInPlace(scaled_target_, method_->kinds(), method_->stats());
  }
}

void ValueFunction::CheckCoalition(const Coalition& s) const {
  if (s.n_features() != target_.size()) {
    ThrowData("coalition over " + std::to_string(s.n_features()) +
              " features for a game of " + std::to_string(target_.size()));
  }
}

void ValueFunction::ConditionalRows(const Coalition& s, Matrix& rows,
                                    std::vector<double>& weights) const {
  const Matrix& bg = method_->background_rows();
  const Matrix& scaled = method_->scaled_background();
  const std::size_t n_bg = bg.rows();
  const std::size_t n = target_.size();
  const std::size_t present = s.count();

  std::vector<std::size_t> keep;
  std::vector<double> w;
  if (present == 0) {
    // Nothing observed: the conditional is the unconditional background mean.
    keep.resize(n_bg);
    std::iota(keep.begin(), keep.end(), std::size_t{0});
    w.assign(n_bg, 1.0);
  } else {
    std::vector<double> d2(n_bg, 0.0);
    for (std::size_t r = 0; r < n_bg; ++r) {
      const auto z = scaled.row(r);
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        if (!s.contains(k)) continue;
        const double diff = z[k] - scaled_target_[k];
        acc += diff * diff;
      }
      d2[r] = acc;
    }
    keep.resize(n_bg);
    std::iota(keep.begin(), keep.end(), std::size_t{0});
    const std::size_t m = std::min(method_->config().n_samples, n_bg);
    auto closer = [&](std::size_t a, std::size_t b) {
      return d2[a] < d2[b] || (d2[a] == d2[b] && a < b);
    };
    std::partial_sort(keep.begin(), keep.begin() + static_cast<std::ptrdiff_t>(m),
                      keep.end(), closer);
    keep.resize(m);
    const double sigma = method_->config().sigma.value_or(
        0.1 * std::sqrt(static_cast<double>(present)));
    const double d2_min = d2[keep.front()];
    for (std::size_t r : keep) {
      // Shifting by the smallest distance leaves the normalized weights
      // unchanged and keeps the nearest row's weight at exactly 1.
      w.push_back(std::exp(-(d2[r] - d2_min) / (2.0 * sigma * sigma)));
    }
  }
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  std::vector<double> row(n);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    const auto src = bg.row(keep[i]);
    for (std::size_t k = 0; k < n; ++k) row[k] = s.contains(k) ? target_[k] : src[k];
    rows.AppendRow(row);
    weights.push_back(w[i] / total);
  }
}

void ValueFunction::AppendHybridRows(const Coalition& s, Matrix& rows,
                                     std::vector<double>& weights) const {
  const std::size_t n = target_.size();
  std::vector<double> row(n);
  if (kind_ == MethodKind::kPairwise) {
    for (std::size_t k = 0; k < n; ++k) row[k] = s.contains(k) ? target_[k] : reference_[k];
    rows.AppendRow(row);
    weights.push_back(1.0);
    return;
  }
  if (kind_ == MethodKind::kConditionalEmpirical) {
    ConditionalRows(s, rows, weights);
    return;
  }
  const Matrix& fill = method_->fill_rows();
  const auto& fw = method_->fill_weights();
  for (std::size_t r = 0; r < fill.rows(); ++r) {
    const auto src = fill.row(r);
    for (std::size_t k = 0; k < n; ++k) row[k] = s.contains(k) ? target_[k] : src[k];
    rows.AppendRow(row);
    weights.push_back(fw[r]);
  }
}

HybridBatch ValueFunction::HybridRows(const Coalition& s) const {
  CheckCoalition(s);
  HybridBatch batch;
  batch.rows = Matrix(0, target_.size());
  AppendHybridRows(s, batch.rows, batch.weights);
  return batch;
}

std::vector<double> ValueFunction::Values(std::span<const Coalition> coalitions) const {
  std::vector<double> values(coalitions.size());
  std::size_t next = 0;
  while (next < coalitions.size()) {
    Matrix rows(0, target_.size());
    std::vector<double> weights;
    std::vector<std::size_t> offsets{0};
    const std::size_t first = next;
    while (next < coalitions.size()) {
      CheckCoalition(coalitions[next]);
      AppendHybridRows(coalitions[next], rows, weights);
      offsets.push_back(rows.rows());
      ++next;
      if (rows.rows() >= kMaxRowsPerBatch) break;
    }
    const auto preds = predictor_.Predict(rows);
    evaluations_.fetch_add(rows.rows());
    for (std::size_t c = 0; c + 1 < offsets.size(); ++c) {
      // Anchored at the first row's prediction: when every row predicts the
      // same value (e.g. the full coalition) the result is that value exactly.
      const std::size_t b = offsets[c], e = offsets[c + 1];
      const double anchor = preds[b];
      double acc = 0.0;
      for (std::size_t i = b; i < e; ++i) acc += weights[i] * (preds[i] - anchor);
      values[first + c] = anchor + acc;
    }
  }
  return values;
}

double ValueFunction::Value(const Coalition& s) const {
  return Values(std::span<const Coalition>(&s, 1))[0];
}

}  // namespace pairshap
