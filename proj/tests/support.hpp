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

// Shared helpers for the test binaries: small predictors, random models,
// and an attribution oracle that shares no code with the solvers.

#ifndef PAIRSHAP_TESTS_SUPPORT_HPP_
#define PAIRSHAP_TESTS_SUPPORT_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "pairshap/data.hpp"
#include "pairshap/error.hpp"
#include "pairshap/model.hpp"
#include "pairshap/random.hpp"
#include "pairshap/valuefn.hpp"

namespace pairshap::testing {

inline ErrorKind KindOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no pairshap::Error thrown";
  return ErrorKind::kRuntime;
}

inline std::string MessageOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

// Predictor backed by an arbitrary function of one row.
class FunctionPredictor final : public Predictor {
 public:
  using Fn = std::function<double(std::span<const double>)>;
  FunctionPredictor(std::size_t n_features, Fn fn) : n_(n_features), fn_(std::move(fn)) {}
  std::size_t n_features() const override { return n_; }
  OutputKind output_kind() const override { return OutputKind::kRegression; }
  std::string type_name() const override { return "function"; }

 protected:
  void Evaluate(const Matrix& batch, std::span<double> out) const override {
    for (std::size_t r = 0; r < batch.rows(); ++r) out[r] = fn_(batch.row(r));
  }

 private:
  std::size_t n_;
  Fn fn_;
};

// Game given directly by v(mask) over n players.
class MaskGame final : public CoalitionGame {
 public:
  MaskGame(std::size_t n, std::function<double(std::uint64_t)> v) : n_(n), v_(std::move(v)) {}
  std::size_t n_players() const override { return n_; }
  std::vector<double> Values(std::span<const Coalition> coalitions) const override {
    std::vector<double> out;
    for (const auto& c : coalitions) {
      std::uint64_t mask = 0;
      for (std::size_t k = 0; k < n_; ++k) {
        if (c.contains(k)) mask |= std::uint64_t{1} << k;
      }
      out.push_back(v_(mask));
    }
    return out;
  }

 private:
  std::size_t n_;
  std::function<double(std::uint64_t)> v_;
};

// Shapley values as the average marginal contribution over every player
// ordering. Exponential in n! so keep n <= 8.
inline std::vector<double> PermutationShapley(std::size_t n,
                                              const std::function<double(std::uint64_t)>& v) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> sum(n, 0.0);
  std::vector<double> cache(std::size_t{1} << n);
  std::vector<bool> known(cache.size(), false);
  auto value = [&](std::uint64_t m) {
    if (!known[m]) {
      cache[m] = v(m);
      known[m] = true;
    }
    return cache[m];
  };
  double count = 0.0;
  do {
    std::uint64_t mask = 0;
    for (std::size_t p : order) {
      const std::uint64_t next = mask | (std::uint64_t{1} << p);
      sum[p] += value(next) - value(mask);
      mask = next;
    }
    count += 1.0;
  } while (std::next_permutation(order.begin(), order.end()));
  for (double& s : sum) s /= count;
  return sum;
}

// Hybrid row: target where the mask bit is set, reference elsewhere.
inline std::vector<double> Hybrid(std::span<const double> target, std::span<const double> reference,
                                  std::uint64_t mask) {
  std::vector<double> row(target.size());
  for (std::size_t k = 0; k < row.size(); ++k) {
    row[k] = (mask >> k) & 1U ? target[k] : reference[k];
  }
  return row;
}

// Random regression tree ensemble over features in [low, high]. Nodes are
// laid out breadth first so children always follow their parent.
inline std::unique_ptr<TreeEnsemble> RandomTrees(std::size_t n_features, std::size_t n_trees,
                                                 std::size_t depth, std::uint64_t seed,
                                                 double low = 0.0, double high = 1.0,
                                                 Link link = Link::kIdentity) {
  Rng rng(seed);
  std::vector<Tree> trees;
  for (std::size_t t = 0; t < n_trees; ++t) {
    Tree tree;
    tree.nodes.push_back({});
    std::vector<std::pair<int, std::size_t>> frontier{{0, 0}};
    for (std::size_t f = 0; f < frontier.size(); ++f) {
      const auto [idx, level] = frontier[f];
      if (level == depth) {
        tree.nodes[idx].value = rng.Uniform(-1.0, 1.0);
        continue;
      }
      TreeNode& node = tree.nodes[idx];
      node.feature = static_cast<int>(rng.Index(n_features));
      node.threshold = rng.Uniform(low, high);
      node.left = static_cast<int>(tree.nodes.size());
      node.right = node.left + 1;
      tree.nodes.push_back({});
      tree.nodes.push_back({});
      frontier.push_back({tree.nodes[idx].left, level + 1});
      frontier.push_back({tree.nodes[idx].right, level + 1});
    }
    trees.push_back(std::move(tree));
  }
  return std::make_unique<TreeEnsemble>(std::move(trees), 0.0, link, n_features);
}

inline std::unique_ptr<LinearModel> RandomLinear(std::size_t n_features, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> w(n_features);
  for (double& x : w) x = rng.Uniform(-3.0, 3.0);
  return std::make_unique<LinearModel>(std::move(w), rng.Uniform(-1.0, 1.0));
}

// n_rows x n_features uniform continuous data named x0..x{n-1}.
inline Dataset UniformData(std::size_t n_rows, std::size_t n_features, std::uint64_t seed,
                           double low = 0.0, double high = 1.0) {
  auto spec = SyntheticSpec::Uniform(n_features);
  for (auto& f : spec.features) {
    f.low = low;
    f.high = high;
  }
  return GenerateSynthetic(n_rows, spec, seed).WithoutTarget();
}

inline std::vector<double> ToVector(std::span<const double> s) { return {s.begin(), s.end()}; }

inline double RelativeResidual(double residual, double prediction) {
  return std::abs(residual) / std::max(1.0, std::abs(prediction));
}

}  // namespace pairshap::testing

#endif  // PAIRSHAP_TESTS_SUPPORT_HPP_
