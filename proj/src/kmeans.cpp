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

#include <algorithm>
#include <limits>

#include "pairshap/error.hpp"
#include "pairshap/random.hpp"
#include "pairshap/valuefn.hpp"

namespace pairshap {

namespace {

double SquaredDistance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += (a[k] - b[k]) * (a[k] - b[k]);
  return acc;
}

// k-means++ seeding. Rows already chosen have D^2 = 0 and are never drawn
// again unless every remaining row coincides with a chosen centre, in which
// case an unchosen row is taken uniformly.
Matrix SeedCentres(const Matrix& x, std::size_t k, Rng& rng) {
  const std::size_t n = x.rows();
  Matrix centres(0, x.cols());
  std::vector<bool> chosen(n, false);
  std::size_t first = rng.Index(n);
  centres.AppendRow(x.row(first));
  chosen[first] = true;
  std::vector<double> d2(n);
  for (std::size_t r = 0; r < n; ++r) d2[r] = SquaredDistance(x.row(r), x.row(first));
  while (centres.rows() < k) {
    double total = 0.0;
    for (double d : d2) total += d;
    std::size_t pick = n;
    if (total > 0.0) {
      const double u = rng.Uniform() * total;
      double acc = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        if (d2[r] == 0.0) continue;
        acc += d2[r];
        pick = r;
        if (acc > u) break;
      }
    } else {
      std::vector<std::size_t> open;
      for (std::size_t r = 0; r < n; ++r) {
        if (!chosen[r]) open.push_back(r);
      }
      pick = open[rng.Index(open.size())];
    }
    centres.AppendRow(x.row(pick));
    chosen[pick] = true;
    for (std::size_t r = 0; r < n; ++r) {
      d2[r] = std::min(d2[r], SquaredDistance(x.row(r), x.row(pick)));
    }
  }
  return centres;
}

}  // namespace

WeightedRows KMeansSummary(const Dataset& background, std::size_t k,
                           std::uint64_t seed, std::size_t max_iterations) {
  const std::size_t n = background.n_rows();
  const std::size_t m = background.n_features();
  if (k == 0) ThrowConfig("k-means needs k >= 1");
  if (k > n) {
    ThrowConfig("k-means with k=" + std::to_string(k) + " exceeds the " +
                std::to_string(n) + " background rows");
  }
  const FeatureStats stats = ComputeStats(background);
  const Matrix x = Standardize(background, stats).rows();
  Rng rng(seed);
  Matrix centres = SeedCentres(x, k, rng);

  std::vector<std::size_t> assign(n, k);
  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    for (std::size_t r = 0; r < n; ++r) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d = SquaredDistance(x.row(r), centres.row(c));
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (assign[r] != best) {
        assign[r] = best;
        changed = true;
      }
    }
    // Empty clusters take the point farthest from its current centre.
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t r = 0; r < n; ++r) ++counts[assign[r]];
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t r = 0; r < n; ++r) {
        if (counts[assign[r]] <= 1) continue;
        const double d = SquaredDistance(x.row(r), centres.row(assign[r]));
        if (d > far_d) {
          far_d = d;
          far = r;
        }
      }
      if (far_d < 0.0) break;  // every cluster is a singleton already
      --counts[assign[far]];
      assign[far] = c;
      counts[c] = 1;
      changed = true;
    }
    if (!changed && iter > 0) break;
    Matrix next(k, m, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      auto dst = next.row(assign[r]);
      const auto src = x.row(r);
      for (std::size_t j = 0; j < m; ++j) dst[j] += src[j];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        auto dst = next.row(c);
        const auto old = centres.row(c);
        std::copy(old.begin(), old.end(), dst.begin());
        continue;
      }
      for (double& v : next.row(c)) v /= static_cast<double>(counts[c]);
    }
    centres = std::move(next);
    if (!changed) break;
  }

  // Summaries are member means in the original space.
  const Matrix& raw = background.rows();
  WeightedRows out;
  out.rows = Matrix(0, m);
  std::vector<double> sum(m);
  for (std::size_t c = 0; c < k; ++c) {
    std::fill(sum.begin(), sum.end(), 0.0);
    std::size_t count = 0;
    for (std::size_t r = 0; r < n; ++r) {
      if (assign[r] != c) continue;
      ++count;
      const auto src = raw.row(r);
      for (std::size_t j = 0; j < m; ++j) sum[j] += src[j];
    }
    if (count == 0) continue;
    for (std::size_t j = 0; j < m; ++j) {
      const double mean = sum[j] / static_cast<double>(count);
      if (background.kinds()[j] == FeatureKind::kBinary) {
        sum[j] = 2.0 * sum[j] > static_cast<double>(count) ? 1.0 : 0.0;
      } else {
        sum[j] = mean;
      }
    }
    out.rows.AppendRow(sum);
    out.weights.push_back(static_cast<double>(count));
  }
  return out;
}

}  // namespace pairshap
