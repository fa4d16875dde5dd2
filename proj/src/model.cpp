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

#include "pairshap/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "pairshap/error.hpp"

namespace pairshap {

namespace {

double Logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Link ParseLink(const std::string& text) {
  if (text == "identity") return Link::kIdentity;
  if (text == "logistic") return Link::kLogistic;
  ThrowData("unknown link '" + text + "' (expected identity or logistic)");
}

}  // namespace

const char* ToString(Link link) {
  return link == Link::kLogistic ? "logistic" : "identity";
}

std::vector<double> Predictor::Predict(const Matrix& batch) const {
  std::vector<double> out(batch.rows());
  if (batch.rows() == 0) return out;
  if (batch.cols() != n_features()) {
    ThrowData("predictor expects " + std::to_string(n_features()) +
              " features, got rows of " + std::to_string(batch.cols()));
  }
  Evaluate(batch, out);
  return out;
}

double Predictor::PredictOne(std::span<const double> x) const {
  Matrix batch(1, x.size(), std::vector<double>(x.begin(), x.end()));
  return Predict(batch)[0];
}

// Linear -------------------------------------------------------------------

LinearModel::LinearModel(std::vector<double> weights, double intercept,
                         Link link, std::vector<std::string> feature_names)
    : weights_(std::move(weights)), intercept_(intercept), link_(link) {
  if (weights_.empty()) ThrowData("linear model needs at least one weight");
  if (!feature_names.empty() && feature_names.size() != weights_.size()) {
    ThrowData("linear model has " + std::to_string(weights_.size()) +
              " weights but " + std::to_string(feature_names.size()) +
              " feature names");
  }
  feature_names_ = std::move(feature_names);
}

OutputKind LinearModel::output_kind() const {
  return link_ == Link::kLogistic && !raw_output_ ? OutputKind::kProbability
                                                  : OutputKind::kRegression;
}

void LinearModel::Evaluate(const Matrix& batch, std::span<double> out) const {
  const bool squash = link_ == Link::kLogistic && !raw_output_;
  for (std::size_t r = 0; r < batch.rows(); ++r) {
    const auto x = batch.row(r);
    double z = intercept_;
    for (std::size_t k = 0; k < weights_.size(); ++k) z += weights_[k] * x[k];
    out[r] = squash ? Logistic(z) : z;
  }
}

// Trees --------------------------------------------------------------------

double Tree::Evaluate(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const auto& node = nodes[i];
    i = static_cast<std::size_t>(x[node.feature] < node.threshold ? node.left
                                                                   : node.right);
  }
  return nodes[i].value;
}

void ValidateTree(const Tree& tree, std::size_t n_features) {
  if (tree.nodes.empty()) ThrowData("tree has no nodes");
  const int size = static_cast<int>(tree.nodes.size());
  for (int i = 0; i < size; ++i) {
    const auto& node = tree.nodes[i];
    const std::string where = "node " + std::to_string(i);
    if (node.is_leaf()) {
      if (node.left != -1 || node.right != -1) {
        ThrowData(where + ": leaf must not have children");
      }
      if (!std::isfinite(node.value)) ThrowData(where + ": non-finite leaf value");
      continue;
    }
    if (static_cast<std::size_t>(node.feature) >= n_features) {
      ThrowData(where + ": feature index " + std::to_string(node.feature) +
                " out of range for " + std::to_string(n_features) + " features");
    }
    if (!std::isfinite(node.threshold)) ThrowData(where + ": non-finite threshold");
    for (int child : {node.left, node.right}) {
      if (child <= i) {
        ThrowData(where + ": child index " + std::to_string(child) +
                  " must be greater than the node's own index");
      }
      if (child >= size) {
        ThrowData(where + ": child index " + std::to_string(child) +
                  " out of bounds (" + std::to_string(size) + " nodes)");
      }
    }
  }
}

TreeEnsemble::TreeEnsemble(std::vector<Tree> trees, double base_score,
                           Link link, std::size_t n_features,
                           std::vector<std::string> feature_names)
    : trees_(std::move(trees)),
      base_score_(base_score),
      link_(link),
      n_features_(n_features) {
  if (n_features_ == 0) ThrowData("tree ensemble needs a positive feature count");
  if (!feature_names.empty() && feature_names.size() != n_features_) {
    ThrowData("tree ensemble declares " + std::to_string(n_features_) +
              " features but " + std::to_string(feature_names.size()) +
              " feature names");
  }
  for (std::size_t t = 0; t < trees_.size(); ++t) {
    try {
      ValidateTree(trees_[t], n_features_);
    } catch (const Error& e) {
      ThrowData("tree " + std::to_string(t) + ", " + e.what());
    }
  }
  feature_names_ = std::move(feature_names);
}

OutputKind TreeEnsemble::output_kind() const {
  return link_ == Link::kLogistic && !raw_output_ ? OutputKind::kProbability
                                                  : OutputKind::kRegression;
}

void TreeEnsemble::Evaluate(const Matrix& batch, std::span<double> out) const {
  const bool squash = link_ == Link::kLogistic && !raw_output_;
  for (std::size_t r = 0; r < batch.rows(); ++r) {
    const auto x = batch.row(r);
    double z = base_score_;
    for (const auto& tree : trees_) z += tree.Evaluate(x);
    out[r] = squash ? Logistic(z) : z;
  }
}

// JSON schema --------------------------------------------------------------

namespace {

using nlohmann::json;

void CheckExpected(const Predictor& model, const ModelLoadOptions& options) {
  if (!options.expected_features) return;
  const auto& expected = *options.expected_features;
  if (model.n_features() != expected.size()) {
    ThrowData("model expects " + std::to_string(model.n_features()) +
              " features but the dataset has " + std::to_string(expected.size()));
  }
  const auto& names = model.feature_names();
  if (!names.empty() && names != expected) {
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i] != expected[i]) {
        ThrowData("model feature " + std::to_string(i) + " is '" + names[i] +
                  "' but the dataset has '" + expected[i] + "'");
      }
    }
  }
}

}  // namespace

std::unique_ptr<Predictor> ParseModel(const std::string& json_text,
                                      const ModelLoadOptions& options) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    ThrowData(std::string("model is not valid JSON: ") + e.what());
  }
  std::unique_ptr<Predictor> model;
  try {
    if (!doc.is_object()) ThrowData("model document must be a JSON object");
    const int version = doc.value("schema_version", 1);
    if (version != 1) {
      ThrowData("unsupported model schema_version " + std::to_string(version));
    }
    const std::string type = doc.at("type").get<std::string>();
    const Link link = ParseLink(doc.value("link", std::string("identity")));
    std::vector<std::string> names;
    if (doc.contains("feature_names")) {
      names = doc.at("feature_names").get<std::vector<std::string>>();
    }
    if (type == "linear") {
      auto linear = std::make_unique<LinearModel>(
          doc.at("weights").get<std::vector<double>>(),
          doc.value("intercept", 0.0), link, std::move(names));
      linear->set_raw_output(options.raw_output);
      model = std::move(linear);
    } else if (type == "tree_ensemble") {
      std::vector<Tree> trees;
      int max_feature = -1;
      for (const auto& jt : doc.at("trees")) {
        Tree tree;
        for (const auto& jn : jt.at("nodes")) {
          TreeNode node;
          node.feature = jn.value("feature", -1);
          node.threshold = jn.value("threshold", 0.0);
          node.left = jn.value("left", -1);
          node.right = jn.value("right", -1);
          node.value = jn.value("value", 0.0);
          if (node.feature < -1) ThrowData("node feature index must be >= -1");
          max_feature = std::max(max_feature, node.feature);
          tree.nodes.push_back(node);
        }
        trees.push_back(std::move(tree));
      }
      std::size_t n_features = static_cast<std::size_t>(max_feature + 1);
      if (doc.contains("n_features")) {
        n_features = doc.at("n_features").get<std::size_t>();
      } else if (!names.empty()) {
        n_features = names.size();
      }
      auto ensemble = std::make_unique<TreeEnsemble>(
          std::move(trees), doc.value("base_score", 0.0), link, n_features,
          std::move(names));
      ensemble->set_raw_output(options.raw_output);
      model = std::move(ensemble);
    } else {
      ThrowData("unsupported model type '" + type + "'");
    }
  } catch (const json::exception& e) {
    ThrowData(std::string("model schema violation: ") + e.what());
  }
  CheckExpected(*model, options);
  return model;
}

std::unique_ptr<Predictor> LoadModel(const std::string& path,
                                     const ModelLoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) ThrowData("cannot open model '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return ParseModel(buffer.str(), options);
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

std::string ModelToJson(const Predictor& model) {
  nlohmann::ordered_json doc;
  doc["schema_version"] = 1;
  if (const auto* linear = dynamic_cast<const LinearModel*>(&model)) {
    doc["type"] = "linear";
    doc["weights"] = linear->weights();
    doc["intercept"] = linear->intercept();
    doc["link"] = ToString(linear->link());
  } else if (const auto* trees = dynamic_cast<const TreeEnsemble*>(&model)) {
    doc["type"] = "tree_ensemble";
    doc["base_score"] = trees->base_score();
    doc["link"] = ToString(trees->link());
    doc["n_features"] = trees->n_features();
    doc["trees"] = nlohmann::ordered_json::array();
    for (const auto& tree : trees->trees()) {
      nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
      for (const auto& n : tree.nodes) {
        nlohmann::ordered_json jn;
        jn["feature"] = n.feature;
        if (n.is_leaf()) {
          jn["value"] = n.value;
        } else {
          jn["threshold"] = n.threshold;
          jn["left"] = n.left;
          jn["right"] = n.right;
        }
        nodes.push_back(jn);
      }
      doc["trees"].push_back({{"nodes", nodes}});
    }
  } else {
    ThrowConfig("only linear and tree_ensemble models can be serialized");
  }
  if (!model.feature_names().empty()) doc["feature_names"] = model.feature_names();
  return doc.dump(2);
}

}  // namespace pairshap
