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

#include "pairshap/diagnostics.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numbers>
#include <numeric>

#include "pairshap/error.hpp"
#include "parallel.hpp"

namespace pairshap {

namespace {

NormalizedSample MakeSample(std::size_t feature, std::size_t pair, double delta_x,
                            double numerator) {
  NormalizedSample s;
  s.feature = feature;
  s.pair = pair;
  s.delta_x = delta_x;
  s.numerator = numerator;
  s.degenerate = delta_x == 0.0;
  s.value = s.degenerate ? 0.0 : numerator / delta_x;
  return s;
}

std::vector<double> Midranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> Pearson(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  if (n < 2) return std::nullopt;
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double ElapsedMs(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

void RethrowFirst(const std::vector<std::exception_ptr>& errors, const char* what) {
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const Error& e) {
      throw Error(e.kind(), std::string(what) + " " + std::to_string(i) + ": " + e.what());
    }
  }
}

}  // namespace

std::vector<NormalizedSample> NormalizeNonPairwise(
    std::span<const Explanation> explanations,
    std::span<const std::pair<std::size_t, std::size_t>> pairs) {
  if (explanations.empty()) return {};
  const MethodKind method = explanations.front().method;
  const std::size_t n = explanations.front().phi.size();
  for (const auto& e : explanations) {
    if (e.method != method) ThrowData("explanations mix removal methods");
    if (IsPairwise(e.method)) ThrowData("pairwise explanations need NormalizePairwise");
    if (e.phi.size() != n || e.target.size() != n) {
      ThrowData("explanations differ in feature count");
    }
  }
  std::vector<NormalizedSample> out;
  out.reserve(pairs.size() * n);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [i, j] = pairs[p];
    if (i >= explanations.size() || j >= explanations.size()) {
      ThrowData("pair " + std::to_string(p) + " indexes past the explanation list");
    }
    const Explanation& a = explanations[i];
    const Explanation& b = explanations[j];
    for (std::size_t k = 0; k < n; ++k) {
      NormalizedSample s = MakeSample(k, p, a.target[k] - b.target[k], a.phi[k] - b.phi[k]);
      s.row_i = a.target_row ? a.target_row : std::optional<std::size_t>(i);
      s.row_j = b.target_row ? b.target_row : std::optional<std::size_t>(j);
      out.push_back(s);
    }
  }
  return out;
}

std::vector<NormalizedSample> NormalizePairwise(std::span<const Explanation> explanations) {
  std::vector<NormalizedSample> out;
  for (std::size_t p = 0; p < explanations.size(); ++p) {
    const Explanation& e = explanations[p];
    if (!IsPairwise(e.method)) ThrowData("NormalizePairwise given a non-pairwise explanation");
    if (e.reference.size() != e.phi.size() || e.target.size() != e.phi.size()) {
      ThrowData("pairwise explanation " + std::to_string(p) + " lacks its pair vectors");
    }
    for (std::size_t k = 0; k < e.phi.size(); ++k) {
      NormalizedSample s = MakeSample(k, p, e.target[k] - e.reference[k], e.phi[k]);
      s.row_i = e.target_row;
      s.row_j = e.reference_row;
      out.push_back(s);
    }
  }
  return out;
}

std::vector<double> FeatureValues(std::span<const NormalizedSample> samples,
                                  std::size_t feature) {
  std::vector<double> out;
  for (const auto& s : samples) {
    if (s.feature == feature && !s.degenerate) out.push_back(s.value);
  }
  return out;
}

DistStats ComputeDistStats(std::span<const double> values) {
  if (values.empty()) ThrowData("distribution statistics of an empty sample");
  DistStats st;
  st.count = values.size();
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double m2 = 0.0, m3 = 0.0;
  for (double v : values) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  st.mean = mean;
  st.std = values.size() > 1 ? std::sqrt(m2 / (n - 1.0)) : 0.0;
  m2 /= n;
  m3 /= n;
  if (values.size() >= 3 && m2 > 0.0) {
    const double g1 = m3 / std::pow(m2, 1.5);
    st.skew = std::sqrt(n * (n - 1.0)) / (n - 2.0) * g1;
  }
  return st;
}

double KolmogorovTail(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  constexpr double kPi2 = std::numbers::pi * std::numbers::pi;
  double p;
  if (lambda < 1.0) {
    // Jacobi theta form of the CDF; converges fast where the alternating
    // series does not.
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
      const double t = static_cast<double>(2 * k - 1);
      const double term = std::exp(-t * t * kPi2 / (8.0 * lambda * lambda));
      s += term;
      if (term < 1e-300) break;
    }
    p = 1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * s;
  } else {
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
      const double kk = static_cast<double>(k);
      const double term = std::exp(-2.0 * kk * kk * lambda * lambda);
      s += (k % 2 == 1) ? term : -term;
      if (term < 1e-300) break;
    }
    p = 2.0 * s;
  }
  return std::clamp(p, 0.0, 1.0);
}

KsResult KsTest(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) ThrowData("KS test needs two non-empty samples");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size());
  const double nb = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double t = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == t) ++i;
    while (j < y.size() && y[j] == t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  KsResult r;
  r.d = d;
  const double ne = na * nb / (na + nb);
  r.p = KolmogorovTail(std::sqrt(ne) * d);
  return r;
}

FeatureMonotonicity Monotonicity(std::span<const NormalizedSample> samples,
                                 std::size_t feature, Sign expected) {
  FeatureMonotonicity m;
  m.feature = feature;
  m.expected = expected;
  for (const auto& s : samples) {
    if (s.feature != feature) continue;
    ++m.n_pairs;
    bool matched;
    if (s.degenerate) {
      ++m.n_dummy;
      matched = s.numerator == 0.0;
    } else {
      matched = expected == Sign::kPositive ? s.value > 0.0 : s.value < 0.0;
    }
    if (matched) ++m.n_matched;
  }
  m.fraction = m.n_pairs ? static_cast<double>(m.n_matched) / static_cast<double>(m.n_pairs)
                         : 0.0;
  return m;
}

std::vector<FeatureMonotonicity> MonotonicityReport(
    std::span<const NormalizedSample> samples, std::span<const std::size_t> audited,
    std::span<const std::optional<Sign>> signs) {
  std::vector<FeatureMonotonicity> out;
  for (std::size_t f : audited) {
    if (f >= signs.size() || !signs[f]) {
      ThrowConfig("feature " + std::to_string(f) + " has no declared monotone sign");
    }
    out.push_back(Monotonicity(samples, f, *signs[f]));
  }
  return out;
}

std::optional<double> DummyRatio(std::span<const NormalizedSample> samples,
                                 std::size_t feature) {
  std::size_t dummies = 0, zeros = 0;
  for (const auto& s : samples) {
    if (s.feature != feature || !s.degenerate) continue;
    ++dummies;
    if (s.numerator == 0.0) ++zeros;
  }
  if (dummies == 0) return std::nullopt;
  return static_cast<double>(zeros) / static_cast<double>(dummies);
}

std::vector<std::optional<Sign>> CorrelationSigns(const Dataset& data,
                                                  std::span<const double> response) {
  if (response.size() != data.n_rows()) {
    ThrowData("response has " + std::to_string(response.size()) + " values for " +
              std::to_string(data.n_rows()) + " rows");
  }
  std::vector<std::optional<Sign>> out(data.n_features());
  for (std::size_t k = 0; k < data.n_features(); ++k) {
    const auto col = data.rows().Column(k);
    const auto r = Pearson(col, response);
    if (r && *r != 0.0) out[k] = *r > 0.0 ? Sign::kPositive : Sign::kNegative;
  }
  return out;
}

std::optional<double> Spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) ThrowData("Spearman of samples with different lengths");
  if (a.size() < 2) return std::nullopt;
  const auto ra = Midranks(a);
  const auto rb = Midranks(b);
  return Pearson(ra, rb);
}

PerturbationResult PerturbationTest(const Dataset& rows, const Predictor& predictor,
                                    const MethodConfig& method, const Dataset& background,
                                    const PerturbationOptions& options) {
  const std::size_t k = options.feature;
  if (k >= rows.n_features()) {
    ThrowData("perturbation feature index " + std::to_string(k) + " out of range");
  }
  if (rows.kinds()[k] != FeatureKind::kContinuous) {
    ThrowData("perturbation feature '" + rows.names()[k] + "' is not continuous");
  }
  if (options.deltas.empty()) ThrowConfig("perturbation test needs at least one delta");
  ValidateMethod(method);

  struct Case {
    std::size_t row;
    double delta;
  };
  std::vector<Case> cases;
  PerturbationResult out;
  for (std::size_t r = 0; r < rows.n_rows(); ++r) {
    for (double d : options.deltas) {
      const double v = rows.row(r)[k] + d;
      if ((options.valid_min && v < *options.valid_min) ||
          (options.valid_max && v > *options.valid_max)) {
        ++out.skipped;
        continue;
      }
      cases.push_back({r, d});
    }
  }

  std::shared_ptr<const PreparedMethod> prepared;
  std::vector<Explanation> originals;
  if (!IsPairwise(method.kind)) {
    prepared = PreparedMethod::Prepare(method, background);
    originals = ExplainRows(rows, prepared, predictor, options.solver, options.jobs);
  }

  out.row.resize(cases.size());
  out.delta.resize(cases.size());
  out.prediction_delta.resize(cases.size());
  out.attribution_delta.resize(cases.size());
  std::vector<std::exception_ptr> errors;
  internal::ParallelFor(
      cases.size(), options.jobs,
      [&](std::size_t c) {
        const auto orig_span = rows.row(cases[c].row);
        std::vector<double> orig(orig_span.begin(), orig_span.end());
        std::vector<double> pert = orig;
        pert[k] += cases[c].delta;
        Matrix batch(0, orig.size());
        batch.AppendRow(pert);
        batch.AppendRow(orig);
        const auto f = predictor.Predict(batch);
        out.row[c] = cases[c].row;
        out.delta[c] = cases[c].delta;
        out.prediction_delta[c] = f[0] - f[1];
        if (IsPairwise(method.kind)) {
          const auto pair = MakePair(pert, orig, cases[c].row, cases[c].row);
          out.attribution_delta[c] = PruneAndSolve(pair, predictor, options.solver).phi[k];
        } else {
          const auto e = ExplainWithMethod(prepared, predictor, pert, options.solver);
          out.attribution_delta[c] = e.phi[k] - originals[cases[c].row].phi[k];
        }
      },
      errors);
  RethrowFirst(errors, "perturbation case");
  return out;
}

std::vector<double> ParseDeltaGrid(const std::string& text) {
  auto fail = [&] {
    ThrowConfig("delta grid '" + text + "' is not start:stop:step with step > 0");
  };
  std::vector<double> parts;
  std::size_t begin = 0;
  for (;;) {
    const std::size_t end = text.find(':', begin);
    const std::string piece = text.substr(begin, end == std::string::npos ? end : end - begin);
    double v = 0.0;
    const auto res = std::from_chars(piece.data(), piece.data() + piece.size(), v);
    if (piece.empty() || res.ec != std::errc() || res.ptr != piece.data() + piece.size() ||
        !std::isfinite(v)) {
      fail();
    }
    parts.push_back(v);
    if (end == std::string::npos) break;
    begin = end + 1;
  }
  if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) fail();
  std::vector<double> out;
  const double span = parts[1] - parts[0];
  const auto steps = static_cast<std::size_t>(std::floor(span / parts[2] + 1e-9));
  if (steps > 1000000) ThrowConfig("delta grid '" + text + "' has too many steps");
  for (std::size_t i = 0; i <= steps; ++i) {
    // Round away accumulated representation error (-0.2 + 3 * 0.1).
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", parts[0] + static_cast<double>(i) * parts[2]);
    double v = 0.0;
    std::from_chars(buf, buf + std::strlen(buf), v);
    if (std::abs(v) > parts[2] * 1e-9) out.push_back(v);
  }
  if (out.empty()) ThrowConfig("delta grid '" + text + "' has no nonzero deltas");
  return out;
}

std::vector<BenchmarkEntry> Benchmark(std::span<const MethodConfig> methods,
                                      const ExplicandPair& pair, const Dataset& background,
                                      const Predictor& predictor,
                                      const BenchmarkOptions& options) {
  if (options.repeats < 2) ThrowConfig("benchmark needs repeats >= 2");
  std::vector<BenchmarkEntry> out;
  for (const auto& method : methods) {
    BenchmarkEntry entry;
    entry.method = method.kind;
    for (std::size_t r = 0; r < options.repeats; ++r) {
      const auto start = std::chrono::steady_clock::now();
      Explanation e;
      if (IsPairwise(method.kind)) {
        e = PruneAndSolve(pair, predictor, options.solver);
      } else {
        auto prepared = PreparedMethod::Prepare(method, background);
        e = ExplainWithMethod(prepared, predictor, pair.target, options.solver);
      }
      entry.times_ms.push_back(ElapsedMs(start));
      entry.n_evaluations = e.n_evaluations;
      entry.n_coalitions = e.n_coalitions;
    }
    const auto st = ComputeDistStats(entry.times_ms);
    entry.mean_ms = st.mean;
    entry.std_ms = st.std;
    out.push_back(std::move(entry));
  }
  return out;
}

std::vector<HeatmapCell> SimilarityHeatmap(std::span<const Explanation> pairwise,
                                           std::span<const std::optional<Sign>> signs,
                                           std::size_t bins) {
  if (bins == 0) ThrowConfig("similarity heatmap needs at least one bin");
  if (pairwise.empty()) return {};
  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (const auto& e : pairwise) {
    if (!IsPairwise(e.method)) ThrowData("similarity heatmap needs pairwise explanations");
    if (!e.similarity) ThrowData("similarity heatmap needs pairs with similarity scores");
    if (first) {
      lo = hi = *e.similarity;
      first = false;
    }
    lo = std::min(lo, *e.similarity);
    hi = std::max(hi, *e.similarity);
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<std::vector<std::size_t>> members(bins);
  for (std::size_t i = 0; i < pairwise.size(); ++i) {
    std::size_t b = 0;
    if (width > 0.0) {
      b = static_cast<std::size_t>((*pairwise[i].similarity - lo) / width);
      b = std::min(b, bins - 1);
    }
    members[b].push_back(i);
  }
  const std::size_t n = pairwise.front().phi.size();
  std::vector<HeatmapCell> out;
  for (std::size_t b = 0; b < bins; ++b) {
    if (members[b].empty()) continue;
    std::vector<Explanation> subset;
    for (std::size_t i : members[b]) subset.push_back(pairwise[i]);
    const auto samples = NormalizePairwise(subset);
    for (std::size_t k = 0; k < n; ++k) {
      HeatmapCell cell;
      cell.bin = b;
      cell.low = lo + width * static_cast<double>(b);
      cell.high = b + 1 == bins ? hi : lo + width * static_cast<double>(b + 1);
      cell.feature = k;
      if (k < signs.size() && signs[k]) {
        const auto m = Monotonicity(samples, k, *signs[k]);
        cell.n_pairs = m.n_pairs;
        cell.matched_fraction = m.fraction;
      } else {
        cell.n_pairs = subset.size();
      }
      std::vector<double> dx, phi;
      for (const auto& s : samples) {
        if (s.feature != k || s.degenerate) continue;
        dx.push_back(s.delta_x);
        phi.push_back(s.numerator);
      }
      cell.spearman = Spearman(dx, phi);
      out.push_back(cell);
    }
  }
  return out;
}

}  // namespace pairshap
