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

#ifndef PAIRSHAP_MODEL_HPP_
#define PAIRSHAP_MODEL_HPP_

#include <chrono>
#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pairshap/matrix.hpp"

namespace pairshap {

enum class OutputKind { kRegression, kProbability };
enum class Link { kIdentity, kLogistic };

const char* ToString(Link link);

// Scalar-output black box. Implementations must be deterministic and safe
// to call from several threads at once.
class Predictor {
 public:
  virtual ~Predictor() = default;

  virtual std::size_t n_features() const = 0;
  virtual OutputKind output_kind() const = 0;
  virtual std::string type_name() const = 0;

  // Expected feature names in order; empty when the model did not declare
  // them.
  const std::vector<std::string>& feature_names() const noexcept {
    return feature_names_;
  }

  // Checks the batch width, then delegates to Evaluate().
  std::vector<double> Predict(const Matrix& batch) const;
  double PredictOne(std::span<const double> x) const;

 protected:
  virtual void Evaluate(const Matrix& batch, std::span<double> out) const = 0;

  std::vector<std::string> feature_names_;
};

// f(x) = link(w . x + b). With `raw_output` the logistic link is skipped so
// attributions are in log-odds.
class LinearModel final : public Predictor {
 public:
  LinearModel(std::vector<double> weights, double intercept,
              Link link = Link::kIdentity,
              std::vector<std::string> feature_names = {});

  std::size_t n_features() const override { return weights_.size(); }
  OutputKind output_kind() const override;
  std::string type_name() const override { return "linear"; }

  const std::vector<double>& weights() const noexcept { return weights_; }
  double intercept() const noexcept { return intercept_; }
  Link link() const noexcept { return link_; }
  void set_raw_output(bool raw) { raw_output_ = raw; }

 protected:
  void Evaluate(const Matrix& batch, std::span<double> out) const override;

 private:
  std::vector<double> weights_;
  double intercept_;
  Link link_;
  bool raw_output_ = false;
};

// Array-encoded binary tree. An internal node sends x[feature] < threshold
// to `left`, everything else to `right`; leaves carry feature == -1.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool is_leaf() const noexcept { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;

  double Evaluate(std::span<const double> x) const;
};

// Sum of tree outputs plus base_score, optionally through a logistic link.
// Averaged forests are represented by pre-dividing leaf values.
class TreeEnsemble final : public Predictor {
 public:
  TreeEnsemble(std::vector<Tree> trees, double base_score, Link link,
               std::size_t n_features,
               std::vector<std::string> feature_names = {});

  std::size_t n_features() const override { return n_features_; }
  OutputKind output_kind() const override;
  std::string type_name() const override { return "tree_ensemble"; }

  const std::vector<Tree>& trees() const noexcept { return trees_; }
  double base_score() const noexcept { return base_score_; }
  Link link() const noexcept { return link_; }
  void set_raw_output(bool raw) { raw_output_ = raw; }

 protected:
  void Evaluate(const Matrix& batch, std::span<double> out) const override;

 private:
  std::vector<Tree> trees_;
  double base_score_;
  Link link_;
  std::size_t n_features_;
  bool raw_output_ = false;
};

// Throws a data error unless the node array is topologically ordered,
// in bounds, and every internal node has two children.
void ValidateTree(const Tree& tree, std::size_t n_features);

struct ModelLoadOptions {
  // When set, the model must declare exactly this feature layout.
  std::optional<std::vector<std::string>> expected_features;
  // Skip the logistic link (explain log-odds instead of probability).
  bool raw_output = false;
};

std::unique_ptr<Predictor> LoadModel(const std::string& path,
                                     const ModelLoadOptions& options = {});
std::unique_ptr<Predictor> ParseModel(const std::string& json_text,
                                      const ModelLoadOptions& options = {});
std::string ModelToJson(const Predictor& model);

// Bridges to a child process speaking the line protocol:
//   child -> "READY <feature_count>"            (once, on startup)
//   parent -> "PREDICT <n>" + n CSV rows
//   child -> n lines, one number each
// Batches larger than `batch_size` are split. Access to the process is
// serialized.
struct ExternalPredictorOptions {
  std::size_t batch_size = 256;
  std::chrono::milliseconds timeout{30000};
  OutputKind output_kind = OutputKind::kRegression;
};

class ExternalPredictor final : public Predictor {
 public:
  explicit ExternalPredictor(const std::string& command,
                             ExternalPredictorOptions options = {});
  ~ExternalPredictor() override;

  ExternalPredictor(const ExternalPredictor&) = delete;
  ExternalPredictor& operator=(const ExternalPredictor&) = delete;

  std::size_t n_features() const override { return n_features_; }
  OutputKind output_kind() const override { return options_.output_kind; }
  std::string type_name() const override { return "external"; }
  const std::string& command() const noexcept { return command_; }

 protected:
  void Evaluate(const Matrix& batch, std::span<double> out) const override;

 private:
  struct Process;

  std::string ReadLine(const char* context) const;
  void SendAll(const std::string& payload) const;
  void EvaluateChunk(const Matrix& batch, std::size_t begin, std::size_t end,
                     std::span<double> out) const;

  std::string command_;
  ExternalPredictorOptions options_;
  std::size_t n_features_ = 0;
  std::unique_ptr<Process> process_;
  mutable std::mutex mutex_;
};

}  // namespace pairshap

#endif  // PAIRSHAP_MODEL_HPP_
