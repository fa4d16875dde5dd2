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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdarg>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pairshap/data.hpp"
#include "pairshap/diagnostics.hpp"
#include "pairshap/model.hpp"
#include "pairshap/pairing.hpp"
#include "pairshap/random.hpp"
#include "pairshap/shapley.hpp"
#include "pairshap/valuefn.hpp"

namespace {

using namespace pairshap;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string Fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

// Relative efficiency residuals of every explanation built below.
struct EfficiencyLog {
  std::size_t count = 0;
  double worst = 0.0;

  void Add(double phi0, const std::vector<double>& phi, double prediction) {
    double total = phi0;
    for (double p : phi) total += p;
    worst = std::max(worst, std::abs(total - prediction) / std::max(1.0, std::abs(prediction)));
    ++count;
  }
  void Add(const Explanation& e) { Add(e.phi0, e.phi, e.prediction); }
  void Add(const Attribution& a) { Add(a.phi0, a.phi, a.prediction); }
  void Add(const std::vector<Explanation>& all) {
    for (const auto& e : all) Add(e);
  }
};

EfficiencyLog g_efficiency;

double Seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<double> RowOf(const Dataset& d, std::size_t r) {
  const auto s = d.row(r);
  return {s.begin(), s.end()};
}

// Random regression trees; feature k splits inside [low[k], high[k]].
std::unique_ptr<TreeEnsemble> Trees(const std::vector<double>& low, const std::vector<double>& high,
                                    std::size_t n_trees, std::size_t depth, std::uint64_t seed,
                                    double leaf_scale = 1.0) {
  const std::size_t n = low.size();
  Rng rng(seed);
  std::vector<Tree> trees;
  for (std::size_t t = 0; t < n_trees; ++t) {
    Tree tree;
    tree.nodes.push_back({});
    std::vector<std::pair<int, std::size_t>> frontier{{0, 0}};
    for (std::size_t f = 0; f < frontier.size(); ++f) {
      const auto [idx, level] = frontier[f];
      if (level == depth) {
        tree.nodes[idx].value = rng.Uniform(-leaf_scale, leaf_scale);
        continue;
      }
      const std::size_t k = rng.Index(n);
      tree.nodes[idx].feature = static_cast<int>(k);
      tree.nodes[idx].threshold = rng.Uniform(low[k], high[k]);
      tree.nodes[idx].left = static_cast<int>(tree.nodes.size());
      tree.nodes[idx].right = tree.nodes[idx].left + 1;
      tree.nodes.push_back({});
      tree.nodes.push_back({});
      frontier.push_back({tree.nodes[idx].left, level + 1});
      frontier.push_back({tree.nodes[idx].right, level + 1});
    }
    trees.push_back(std::move(tree));
  }
  return std::make_unique<TreeEnsemble>(std::move(trees), 0.0, Link::kIdentity, n);
}

std::unique_ptr<TreeEnsemble> UnitTrees(std::size_t n, std::size_t n_trees, std::size_t depth,
                                        std::uint64_t seed) {
  return Trees(std::vector<double>(n, 0.0), std::vector<double>(n, 1.0), n_trees, depth, seed);
}

Dataset Uniform(std::size_t rows, std::size_t n, std::uint64_t seed) {
  return GenerateSynthetic(rows, SyntheticSpec::Uniform(n), seed).WithoutTarget();
}

SolverConfig Solver(SolverMode mode, std::size_t budget = 2048, bool prune = true) {
  SolverConfig c;
  c.mode = mode;
  c.n_coalitions = budget;
  c.prune_dummies = prune;
  return c;
}

MethodConfig Method(MethodKind kind) {
  MethodConfig c;
  c.kind = kind;
  return c;
}

// Pairs (i, reference_row) as chosen by a pairwise batch.
std::vector<std::pair<std::size_t, std::size_t>> RowPairs(const std::vector<ExplicandPair>& pairs) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < pairs.size(); ++i) out.push_back({i, pairs[i].reference_row});
  return out;
}

// 1 -------------------------------------------------------------------------

Outcome OracleEquivalence() {
  const auto start = std::chrono::steady_clock::now();
  const MethodKind kinds[] = {MethodKind::kPairwise,       MethodKind::kBaselineZero,
                              MethodKind::kBaselineMedian, MethodKind::kUniform,
                              MethodKind::kMarginalAll,    MethodKind::kMarginalKmeans,
                              MethodKind::kConditionalEmpirical};
  double worst = 0.0;
  std::size_t games = 0;
  bool all_full = true;
  for (std::size_t g = 0; g < 200; ++g) {
    const std::size_t n = 3 + g % 8;
    const std::uint64_t seed = 1000 + g;
    std::unique_ptr<Predictor> model;
    if ((g / 8) % 2 == 0) {
      Rng rng(seed);
      std::vector<double> w(n);
      for (double& x : w) x = rng.Uniform(-3.0, 3.0);
      model = std::make_unique<LinearModel>(std::move(w), rng.Uniform(-1.0, 1.0));
    } else {
      model = UnitTrees(n, 10, 3, seed);
    }
    const Dataset bg = Uniform(60, n, seed);
    const Dataset probe = Uniform(2, n, seed + 7);
    const MethodKind kind = kinds[g % 7];
    std::unique_ptr<ValueFunction> v;
    if (kind == MethodKind::kPairwise) {
      v = std::make_unique<ValueFunction>(MakePair(RowOf(probe, 0), RowOf(probe, 1)), *model);
    } else {
      MethodConfig mc = Method(kind);
      mc.seed = seed;
      v = std::make_unique<ValueFunction>(PreparedMethod::Prepare(mc, bg), *model, RowOf(probe, 0));
    }
    const Attribution exact = ExactShapley(*v);
    const Attribution kernel = KernelShap(*v, Solver(SolverMode::kKernel));
    all_full = all_full && kernel.solver == "kernel_full";
    for (std::size_t k = 0; k < n; ++k) worst = std::max(worst, std::abs(exact.phi[k] - kernel.phi[k]));
    g_efficiency.Add(exact);
    g_efficiency.Add(kernel);
    ++games;
  }
  const double secs = Seconds(start);
  return {worst <= 1e-8 && all_full && secs < 120.0,
          Fmt("%zu games, max |kernel - exact| = %.3g (tol 1e-8), full enumeration %s, %.1f s "
              "(limit 120 s)",
              games, worst, all_full ? "yes" : "no", secs)};
}

// 3 -------------------------------------------------------------------------

Outcome PairwiseAxioms() {
  const std::size_t n = 8;
  const auto model = UnitTrees(n, 30, 4, 33);
  Rng rng(33);
  std::size_t inverse_bad = 0, dummy_bad = 0, single_bad = 0, dummies = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> t(n), r(n);
    for (std::size_t k = 0; k < n; ++k) {
      t[k] = rng.Uniform();
      r[k] = rng.Bernoulli(0.3) ? t[k] : rng.Uniform();
    }
    const auto pair = MakePair(t, r);
    for (bool prune : {true, false}) {
      const SolverConfig c = Solver(SolverMode::kExact, 2048, prune);
      const auto a = PruneAndSolve(pair, *model, c);
      const auto b = PruneAndSolve(MakePair(r, t), *model, c);
      g_efficiency.Add(a);
      g_efficiency.Add(b);
      for (std::size_t k = 0; k < n; ++k) {
        if (a.phi[k] != -b.phi[k]) ++inverse_bad;
        if (pair.dummy_mask[k]) {
          ++dummies;
          if (a.phi[k] != 0.0 || b.phi[k] != 0.0) ++dummy_bad;
        }
      }
    }
    std::vector<double> s = t;
    const std::size_t j = rng.Index(n);
    s[j] = rng.Uniform();
    const auto e = PruneAndSolve(MakePair(t, s), *model, Solver(SolverMode::kExact));
    g_efficiency.Add(e);
    const double gap = model->PredictOne(t) - model->PredictOne(s);
    for (std::size_t k = 0; k < n; ++k) {
      if (e.phi[k] != (k == j ? gap : 0.0)) ++single_bad;
    }
  }
  return {inverse_bad == 0 && dummy_bad == 0 && single_bad == 0,
          Fmt("100 pairs: inverse mismatches %zu, nonzero dummies %zu of %zu, single-feature "
              "mismatches %zu (all must be 0, exact equality)",
              inverse_bad, dummy_bad, dummies, single_bad)};
}

// 4 -------------------------------------------------------------------------

Outcome Pruning() {
  const std::size_t n = 16;
  double worst = 0.0;
  std::size_t max_pruned = 0, min_full = SIZE_MAX;
  std::uint64_t max_rows = 0;
  for (std::uint64_t g = 0; g < 5; ++g) {
    const auto model = UnitTrees(n, 40, 5, 400 + g);
    const Dataset d = Uniform(2, n, 400 + g);
    auto t = RowOf(d, 0);
    auto r = t;
    Rng rng(400 + g);
    for (std::size_t k : rng.Sample(n, 4)) r[k] = d.row(1)[k];
    SolverConfig pruned = Solver(SolverMode::kExact);
    pruned.exact_threshold = 16;
    SolverConfig full = pruned;
    full.prune_dummies = false;
    const auto pair = MakePair(t, r);
    const auto a = PruneAndSolve(pair, *model, pruned);
    const auto b = PruneAndSolve(pair, *model, full);
    g_efficiency.Add(a);
    g_efficiency.Add(b);
    max_pruned = std::max(max_pruned, a.n_coalitions);
    max_rows = std::max(max_rows, a.n_evaluations);
    min_full = std::min(min_full, b.n_coalitions);
    for (std::size_t k = 0; k < n; ++k) {
      if (!pair.dummy_mask[k]) worst = std::max(worst, std::abs(a.phi[k] - b.phi[k]));
    }
  }
  return {max_pruned <= 16 && max_rows <= 16 && min_full == 65536 && worst <= 1e-9,
          Fmt("5 games (n=16, 12 dummies): pruned %zu coalitions / %llu rows (limit 16), "
              "unpruned %zu (expect 65536), max non-dummy diff %.3g (tol 1e-9)",
              max_pruned, static_cast<unsigned long long>(max_rows), min_full, worst)};
}

// 5 -------------------------------------------------------------------------

Outcome PerturbationIdentity() {
  SyntheticSpec spec = SyntheticSpec::Uniform(4);
  spec.features[0].name = "sqft";
  spec.features[0].low = 500.0;
  spec.features[0].high = 5000.0;
  const Dataset rows = GenerateSynthetic(500, spec, 55).WithoutTarget();
  const auto model = Trees({500.0, 0.0, 0.0, 0.0}, {5000.0, 1.0, 1.0, 1.0}, 40, 4, 55);
  PerturbationOptions opt;
  opt.feature = 0;
  opt.deltas = ParseDeltaGrid("-250:250:50");

  const auto pw = PerturbationTest(rows, *model, Method(MethodKind::kPairwise), rows, opt);
  std::size_t mismatches = 0;
  for (std::size_t c = 0; c < pw.row.size(); ++c) {
    if (pw.prediction_delta[c] != pw.attribution_delta[c]) ++mismatches;
  }
  const auto ma = PerturbationTest(rows, *model, Method(MethodKind::kMarginalAll), rows, opt);
  const KsResult ks = KsTest(ma.prediction_delta, ma.attribution_delta);
  const bool sized = pw.row.size() == 5000 && ma.row.size() == 5000 && opt.deltas.size() == 10;
  return {sized && mismatches == 0 && ks.d > 0.0,
          Fmt("%zu samples (500 rows x %zu deltas): pairwise mismatches %zu (must be 0); "
              "marginal_all KS D = %.4f (must be > 0), p = %.3g",
              pw.row.size(), opt.deltas.size(), mismatches, ks.d, ks.p)};
}

// 6 -------------------------------------------------------------------------

Outcome MonotonicityOrdering() {
  const std::size_t n = 6;
  const Dataset data = Uniform(300, n, 66);
  std::vector<double> w(n);
  Rng rng(66);
  for (double& x : w) x = rng.Uniform(0.5, 3.0);
  std::vector<std::size_t> audited(n);
  for (std::size_t k = 0; k < n; ++k) audited[k] = k;
  const std::vector<std::optional<Sign>> signs(n, Sign::kPositive);

  PairBatchOptions self{true, 1};
  const auto similar = SelectPairsBatch(data, data, PairStrategy{SimilarStrategy{}}, self);
  const auto random = SelectPairsBatch(data, data, PairStrategy{RandomStrategy{66}}, self);

  const LinearModel additive(w, 0.2);
  double additive_min = 1.0;
  for (const auto* pairs : {&similar, &random}) {
    const auto ex = ExplainPairs(*pairs, additive, SolverConfig{});
    g_efficiency.Add(ex);
    for (const auto& m : MonotonicityReport(NormalizePairwise(ex), audited, signs)) {
      additive_min = std::min(additive_min, m.fraction);
    }
  }

  // Same weights through a saturating logistic link: monotone in every
  // feature, but with strong interactions.
  const LinearModel logistic(std::vector<double>(w.begin(), w.end()), -5.0, Link::kLogistic);
  const auto pw = ExplainPairs(random, logistic, SolverConfig{});
  g_efficiency.Add(pw);
  const auto b0 = ExplainRows(data, PreparedMethod::Prepare(Method(MethodKind::kBaselineZero), data),
                              logistic, SolverConfig{});
  g_efficiency.Add(b0);
  const auto pw_report = MonotonicityReport(NormalizePairwise(pw), audited, signs);
  const auto b0_report =
      MonotonicityReport(NormalizeNonPairwise(b0, RowPairs(random)), audited, signs);
  bool strictly = true;
  double pw_min = 1.0, b0_max = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    strictly = strictly && pw_report[k].fraction > b0_report[k].fraction;
    pw_min = std::min(pw_min, pw_report[k].fraction);
    b0_max = std::max(b0_max, b0_report[k].fraction);
  }
  return {additive_min == 1.0 && strictly,
          Fmt("additive model: min pairwise fraction %.4f (must be 1); logistic model: pairwise "
              "min %.4f vs baseline_zero max %.4f, pairwise > b0 on every feature: %s",
              additive_min, pw_min, b0_max, strictly ? "yes" : "no")};
}

// 7 -------------------------------------------------------------------------

Outcome DummyRatioPattern() {
  SyntheticSpec spec = SyntheticSpec::Uniform(5);
  spec.features[2].name = "b0";
  spec.features[2].kind = FeatureKind::kBinary;
  spec.features[2].p = 0.5;
  spec.features[3].name = "b1";
  spec.features[3].kind = FeatureKind::kBinary;
  spec.features[3].source = "b0";
  spec.features[3].p_flip = 0.1;
  spec.features[4].name = "b2";
  spec.features[4].kind = FeatureKind::kBinary;
  spec.features[4].source = "x0";
  spec.features[4].threshold = 0.5;
  spec.features[4].p_flip = 0.05;
  const Dataset data = GenerateSynthetic(200, spec, 77).WithoutTarget();
  const auto model = UnitTrees(5, 30, 4, 77);
  const auto pairs = SelectPairsBatch(data, data, PairStrategy{RandomStrategy{77}}, {true, 1});

  const auto pw = ExplainPairs(pairs, *model, SolverConfig{});
  g_efficiency.Add(pw);
  const auto pw_samples = NormalizePairwise(pw);
  const auto ca = ExplainRows(
      data, PreparedMethod::Prepare(Method(MethodKind::kConditionalEmpirical), data), *model,
      SolverConfig{});
  g_efficiency.Add(ca);
  const auto ca_samples = NormalizeNonPairwise(ca, RowPairs(pairs));

  bool pw_ok = true, ca_ok = true;
  std::string ca_detail;
  for (std::size_t k : {2u, 3u, 4u}) {
    const auto p = DummyRatio(pw_samples, k);
    const auto c = DummyRatio(ca_samples, k);
    pw_ok = pw_ok && p && *p == 1.0;
    ca_ok = ca_ok && c && *c < 1.0;
    ca_detail += Fmt(" %s=%.3f", data.names()[k].c_str(), c ? *c : -1.0);
  }
  return {pw_ok && ca_ok,
          Fmt("binary correlated features: pairwise ratio 1.0 on all: %s; conditional ratios%s "
              "(each must be < 1)",
              pw_ok ? "yes" : "no", ca_detail.c_str())};
}

// 8 -------------------------------------------------------------------------

Outcome RuntimeOrdering() {
  const std::size_t n = 12;
  const Dataset bg = Uniform(500, n, 88);
  const auto model = UnitTrees(n, 100, 5, 88);
  const auto pair = SelectPair(bg.row(0), bg, PairStrategy{SimilarStrategy{}}, 0);
  std::vector<MethodConfig> methods{Method(MethodKind::kPairwise), Method(MethodKind::kMarginalAll),
                                    Method(MethodKind::kMarginalKmeans)};
  methods[1].n_background = 100;
  methods[2].k = 10;
  BenchmarkOptions opt;
  opt.repeats = 50;
  opt.solver = Solver(SolverMode::kKernel, 100, false);
  const auto r = Benchmark(methods, pair, bg, *model, opt);
  const std::size_t c = r[0].n_coalitions;
  const bool counts = r[1].n_coalitions == c && r[2].n_coalitions == c &&
                      r[0].n_evaluations == c && r[1].n_evaluations == 100 * c &&
                      r[2].n_evaluations == 10 * c;
  const double ma_ratio = r[1].mean_ms / r[0].mean_ms;
  const double mk_ratio = r[2].mean_ms / r[0].mean_ms;
  return {counts && ma_ratio >= 5.0 && mk_ratio >= 10.0,
          Fmt("%zu coalitions; rows pairwise %llu, ma %llu, mk %llu (analytic 1x/100x/10x: %s); "
              "mean ms pairwise %.4f, ma %.4f (%.1fx, need 5x), mk %.4f (%.1fx, need 10x)",
              c, static_cast<unsigned long long>(r[0].n_evaluations),
              static_cast<unsigned long long>(r[1].n_evaluations),
              static_cast<unsigned long long>(r[2].n_evaluations), counts ? "match" : "MISMATCH",
              r[0].mean_ms, r[1].mean_ms, ma_ratio, r[2].mean_ms, mk_ratio)};
}

// 9 -------------------------------------------------------------------------

Outcome NormalizationSanity() {
  const std::size_t n = 6;
  const Dataset data = Uniform(200, n, 99);
  Rng rng(99);
  std::vector<double> w(n);
  for (double& x : w) x = rng.Uniform(-3.0, 3.0);
  const LinearModel model(w, 0.7);
  const auto random = SelectPairsBatch(data, data, PairStrategy{RandomStrategy{99}}, {true, 1});
  const auto similar = SelectPairsBatch(data, data, PairStrategy{SimilarStrategy{}}, {true, 1});
  const SolverConfig exact = Solver(SolverMode::kExact);

  double worst = 0.0;
  std::size_t checked = 0;
  auto check = [&](const std::vector<NormalizedSample>& samples) {
    for (const auto& s : samples) {
      if (s.degenerate) continue;
      worst = std::max(worst, std::abs(s.value - w[s.feature]));
      ++checked;
    }
  };
  const auto pr = ExplainPairs(random, model, exact);
  const auto ps = ExplainPairs(similar, model, exact);
  g_efficiency.Add(pr);
  g_efficiency.Add(ps);
  const auto pr_samples = NormalizePairwise(pr);
  const auto ps_samples = NormalizePairwise(ps);
  check(pr_samples);
  check(ps_samples);
  for (MethodKind kind : {MethodKind::kBaselineZero, MethodKind::kBaselineMedian,
                          MethodKind::kUniform, MethodKind::kMarginalAll,
                          MethodKind::kMarginalKmeans}) {
    const auto ex = ExplainRows(data, PreparedMethod::Prepare(Method(kind), data), model, exact);
    g_efficiency.Add(ex);
    check(NormalizeNonPairwise(ex, RowPairs(random)));
  }
  // Both samples are w_k up to rounding, so the test below compares
  // rounding noise; it is reported as computed.
  double min_p = 1.0, max_d = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const KsResult ks = KsTest(FeatureValues(pr_samples, k), FeatureValues(ps_samples, k));
    min_p = std::min(min_p, ks.p);
    max_d = std::max(max_d, ks.d);
  }
  return {worst <= 1e-9 && min_p > 0.01,
          Fmt("%zu samples over pairwise and b0/bm/uf/ma/mk: max |value - w_k| = %.3g (tol 1e-9); "
              "random vs similar pairwise KS max D = %.3f, min p = %.3g (must be > 0.01)",
              checked, worst, max_d, min_p)};
}

// 10 ------------------------------------------------------------------------

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

bool IsTimingKey(const std::string& key) {
  return key.size() >= 3 && key.compare(key.size() - 3, 3, "_ms") == 0;
}

void StripTiming(nlohmann::ordered_json& j) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end();) {
      if (IsTimingKey(it.key())) {
        it = j.erase(it);
      } else {
        StripTiming(it.value());
        ++it;
      }
    }
  } else if (j.is_array()) {
    for (auto& v : j) StripTiming(v);
  }
}

// CSV with every *_ms column removed. Timing columns never hold quoted
// fields, so a plain split suffices for locating them.
std::string StripTimingColumns(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  std::vector<bool> drop;
  bool header = true;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (char ch : line) {
      if (ch == '"') quoted = !quoted;
      if (ch == ',' && !quoted) {
        cells.push_back(cell);
        cell.clear();
      } else {
        cell += ch;
      }
    }
    cells.push_back(cell);
    if (header) {
      for (const auto& c : cells) drop.push_back(IsTimingKey(c));
      header = false;
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i < drop.size() && drop[i]) continue;
      out += cells[i] + ",";
    }
    out += "\n";
  }
  return out;
}

// Masks the run directory so outputs of two runs can be compared.
std::string Unrooted(std::string text, const std::string& dir) {
  for (std::size_t at = text.find(dir); at != std::string::npos; at = text.find(dir, at)) {
    text.replace(at, dir.size(), "<out>");
  }
  return text;
}

std::string Canonical(const fs::path& p, const std::string& dir) {
  const std::string text = Unrooted(Slurp(p), dir);
  if (p.extension() == ".json" || p.extension() == ".stdout") {
    auto j = nlohmann::ordered_json::parse(text);
    StripTiming(j);
    return j.dump();
  }
  if (p.extension() == ".csv") return StripTimingColumns(text);
  return text;
}

int Shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome Determinism() {
  const fs::path root = fs::temp_directory_path() / ("pairshap_accept_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root / "a");
  fs::create_directories(root / "b");
  const std::string cli = PAIRSHAP_CLI_PATH;
  auto path = [&](const std::string& rel) { return (root / rel).string(); };
  std::map<std::string, std::string> commands;
  const std::string data = " --dataset " + path("data/synthetic.csv") + " --target target";
  const std::string model = " --model " + path("data/model.json");
  commands["synth"] = "synth --n-rows 120 --n-features 6 --seed 31";
  commands["pairs"] = "pairs" + data + " --strategy random --seed 31";
  commands["explain"] = "explain" + data + model + " --method ma --jobs 2 --seed 31";
  commands["explain_pw"] = "explain" + data + model + " --strategy random --seed 31";
  commands["diagnose"] = "diagnose" + data + model + " --limit 40 --jobs 2 --seed 31";
  commands["perturb"] = "perturb" + data + model + " --feature x1 --deltas -0.2:0.2:0.1 --limit 30 --seed 31";
  commands["bench"] = "bench" + data + model + " --repeats 3 --seed 31";

  if (Shell(cli + " " + commands["synth"] + " --out " + path("data") + " >/dev/null") != 0) {
    return {false, "could not create the input data"};
  }
  std::size_t artifacts = 0;
  std::vector<std::string> differing;
  for (const auto& [name, args] : commands) {
    for (const char* run : {"a", "b"}) {
      const std::string out = path(std::string(run) + "/" + name);
      const int code = Shell(cli + " " + args + " --out " + out + " >" + out + ".stdout 2>/dev/null");
      if (code != 0) return {false, name + " exited with " + std::to_string(code)};
    }
    const std::string a_dir = path("a/" + name), b_dir = path("b/" + name);
    for (const auto& entry : fs::directory_iterator(a_dir)) {
      const fs::path other = fs::path(b_dir) / entry.path().filename();
      ++artifacts;
      if (!fs::exists(other) || Canonical(entry.path(), a_dir) != Canonical(other, b_dir)) {
        differing.push_back(name + "/" + entry.path().filename().string());
      }
    }
    // The stdout summary is an artifact as well.
    ++artifacts;
    if (Canonical(a_dir + ".stdout", a_dir) != Canonical(b_dir + ".stdout", b_dir)) {
      differing.push_back(name + ".stdout");
    }
  }
  fs::remove_all(root);
  std::string list;
  for (const auto& d : differing) list += " " + d;
  return {differing.empty(),
          Fmt("%zu commands, %zu artifacts compared after dropping *_ms timing fields; differing:%s",
              commands.size(), artifacts, differing.empty() ? " none" : list.c_str())};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> order{
      {1, "oracle equivalence", OracleEquivalence},
      {3, "pairwise axioms", PairwiseAxioms},
      {4, "pruning", Pruning},
      {5, "perturbation identity", PerturbationIdentity},
      {6, "monotonicity ordering", MonotonicityOrdering},
      {7, "dummy-pair ratio", DummyRatioPattern},
      {8, "runtime ordering", RuntimeOrdering},
      {9, "normalization sanity", NormalizationSanity},
      {10, "determinism", Determinism},
  };
  std::map<int, std::pair<std::string, Outcome>> results;
  for (const auto& c : order) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    results[c.id] = {c.name, o};
  }
  results[2] = {"efficiency",
                {g_efficiency.count > 0 && g_efficiency.worst <= 1e-6,
                 Fmt("%zu explanations, max relative residual %.3g (tol 1e-6)", g_efficiency.count,
                     g_efficiency.worst)}};
  int failures = 0;
  for (const auto& [id, entry] : results) {
    const auto& [name, o] = entry;
    std::printf("criterion %2d %-22s %s  %s\n", id, name.c_str(), o.pass ? "PASS" : "FAIL",
                o.detail.c_str());
    if (!o.pass) ++failures;
  }
  std::fflush(stdout);
  return failures == 0 ? 0 : 1;
}
