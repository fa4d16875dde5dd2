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

#include <gtest/gtest.h>

#include "pairshap/diagnostics.hpp"
#include "pairshap/pairing.hpp"
#include "support.hpp"

namespace pairshap {
namespace {

using testing::Hybrid;
using testing::KindOf;

Explanation WithMethod(MethodKind method, std::vector<double> target, std::vector<double> phi) {
  Explanation e;
  e.method = method;
  e.target = std::move(target);
  e.phi = std::move(phi);
  return e;
}

Explanation PairwiseExplanation(std::vector<double> target, std::vector<double> reference,
                                std::vector<double> phi) {
  Explanation e = WithMethod(MethodKind::kPairwise, std::move(target), std::move(phi));
  e.reference = std::move(reference);
  return e;
}

TEST(Normalize, NonPairwiseExamples) {
  const std::vector<Explanation> ex{
      WithMethod(MethodKind::kMarginalAll, {3.0, 1.0}, {4.0, 0.5}),
      WithMethod(MethodKind::kMarginalAll, {1.0, 1.0}, {1.0, 0.0}),
  };
  const std::vector<std::pair<std::size_t, std::size_t>> pairs{{0, 1}};
  const auto s = NormalizeNonPairwise(ex, pairs);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].delta_x, 2.0);
  EXPECT_EQ(s[0].numerator, 3.0);
  EXPECT_EQ(s[0].value, 1.5);
  EXPECT_TRUE(s[1].degenerate);
  EXPECT_EQ(s[1].value, 0.0);
  EXPECT_EQ(s[1].numerator, 0.5);
  EXPECT_EQ(*s[0].row_i, 0u);
  EXPECT_EQ(*s[0].row_j, 1u);
}

TEST(Normalize, PairwiseExamples) {
  const std::vector<Explanation> ex{PairwiseExplanation({2.0, 5.0}, {0.0, 5.0}, {6.0, 0.0})};
  const auto s = NormalizePairwise(ex);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].value, 3.0);
  EXPECT_TRUE(s[1].degenerate);
  EXPECT_EQ(FeatureValues(s, 0), std::vector<double>{3.0});
  EXPECT_TRUE(FeatureValues(s, 1).empty());
}

TEST(Normalize, Rejections) {
  const std::vector<Explanation> mixed{WithMethod(MethodKind::kMarginalAll, {1.0}, {1.0}),
                                       WithMethod(MethodKind::kBaselineZero, {1.0}, {1.0})};
  const std::vector<std::pair<std::size_t, std::size_t>> pairs{{0, 1}};
  EXPECT_EQ(KindOf([&] { NormalizeNonPairwise(mixed, pairs); }), ErrorKind::kData);
  const std::vector<Explanation> pw{PairwiseExplanation({1.0}, {0.0}, {1.0})};
  EXPECT_EQ(KindOf([&] { NormalizeNonPairwise(pw, {}); }), ErrorKind::kData);
  EXPECT_EQ(KindOf([&] { NormalizePairwise(mixed); }), ErrorKind::kData);
  const std::vector<std::pair<std::size_t, std::size_t>> past{{0, 5}};
  EXPECT_EQ(KindOf([&] { NormalizeNonPairwise(mixed, past); }), ErrorKind::kData);
}

TEST(Normalize, BothRoutesAgreeOnLinearModels) {
  // phi_k = w_k (x_k - c_k) under any fixed-baseline method, so both
  // normalizations recover w_k wherever delta_x != 0.
  const LinearModel m({1.5, -2.0, 0.25}, 0.3);
  const Dataset bg = testing::UniformData(40, 3, 2);
  MethodConfig mc;
  mc.kind = MethodKind::kBaselineMedian;
  const auto prepared = PreparedMethod::Prepare(mc, bg);
  const auto rows = ExplainRows(bg, prepared, m, SolverConfig{});
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<Explanation> pw;
  for (std::size_t i = 0; i + 1 < 40; ++i) {
    pairs.push_back({i, i + 1});
    pw.push_back(PruneAndSolve(MakePair(testing::ToVector(bg.row(i)), testing::ToVector(bg.row(i + 1))),
                               m, SolverConfig{}));
  }
  for (const auto& s : NormalizeNonPairwise(rows, pairs)) EXPECT_NEAR(s.value, m.weights()[s.feature], 1e-9);
  for (const auto& s : NormalizePairwise(pw)) EXPECT_NEAR(s.value, m.weights()[s.feature], 1e-9);
}

TEST(DistStats, Examples) {
  const std::vector<double> sym{-1.0, 0.0, 1.0};
  const auto a = ComputeDistStats(sym);
  EXPECT_EQ(a.mean, 0.0);
  EXPECT_EQ(a.std, 1.0);
  EXPECT_EQ(*a.skew, 0.0);
  // Reference value from the adjusted Fisher-Pearson definition.
  const std::vector<double> right{1.0, 2.0, 3.0, 10.0};
  EXPECT_NEAR(*ComputeDistStats(right).skew, 1.763632614803888, 1e-12);
  const std::vector<double> one{4.0};
  const auto b = ComputeDistStats(one);
  EXPECT_EQ(b.std, 0.0);
  EXPECT_FALSE(b.skew);
  const std::vector<double> flat{2.0, 2.0, 2.0};
  EXPECT_FALSE(ComputeDistStats(flat).skew);
  EXPECT_EQ(KindOf([] { ComputeDistStats({}); }), ErrorKind::kData);
}

TEST(Ks, IdenticalAndDisjoint) {
  const std::vector<double> a{1.0, 2.0, 3.0, 4.0};
  const auto same = KsTest(a, a);
  EXPECT_EQ(same.d, 0.0);
  EXPECT_EQ(same.p, 1.0);
  const std::vector<double> b{10.0, 11.0, 12.0};
  EXPECT_EQ(KsTest(a, b).d, 1.0);
  EXPECT_EQ(KindOf([&] { KsTest(a, {}); }), ErrorKind::kData);
}

TEST(Ks, ReferenceValues) {
  const std::vector<double> a{0.61, 0.29, 0.06, 0.59, -1.73, -0.74, 0.51, -0.56, 0.39, 1.64,
                              0.05, -0.06, 0.64, -0.82, 0.37, 1.77, 1.09, -1.28, 2.36, -0.89};
  const std::vector<double> b{-1.26, 0.43, 0.37, -0.26, 0.11, 1.4, -0.84, 1.6, 1.19,
                              -0.59, -0.4, 1.72, 0.65, 1.62, 1.05, 2.6, 3.1, 2.2,
                              0.9,   1.5,  1.3,  0.2,  2.8,  1.9, 1.1};
  const auto r = KsTest(a, b);
  EXPECT_NEAR(r.d, 0.44, 1e-12);
  EXPECT_NEAR(r.p, 0.02707681308332474, 1e-10);
  const auto back = KsTest(b, a);
  EXPECT_EQ(back.d, r.d);
  EXPECT_EQ(back.p, r.p);
}

TEST(Ks, KolmogorovTail) {
  const std::pair<double, double> table[] = {
      {0.3, 0.9999906941986655}, {0.5, 0.9639452436648751}, {0.8, 0.5441424115741981},
      {1.0, 0.26999967167735456}, {1.36, 0.049485876755377876}, {2.0, 0.0006709252557796953}};
  for (const auto& [lambda, p] : table) EXPECT_NEAR(KolmogorovTail(lambda), p, 1e-12) << lambda;
  EXPECT_EQ(KolmogorovTail(0.0), 1.0);
  double prev = 1.0;
  for (double l = 0.05; l < 3.0; l += 0.05) {
    const double p = KolmogorovTail(l);
    EXPECT_LE(p, prev + 1e-15);
    prev = p;
  }
}

TEST(Ks, SameDistributionRarelyRejects) {
  Rng rng(8);
  int rejections = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(80), b(60);
    for (double& x : a) x = rng.Normal();
    for (double& x : b) x = rng.Normal();
    if (KsTest(a, b).p < 0.05) ++rejections;
  }
  EXPECT_LT(rejections, 22);
}

std::vector<NormalizedSample> Samples(std::initializer_list<std::pair<double, double>> dx_num) {
  std::vector<NormalizedSample> out;
  std::size_t p = 0;
  for (const auto& [dx, num] : dx_num) {
    NormalizedSample s;
    s.pair = p++;
    s.delta_x = dx;
    s.numerator = num;
    s.degenerate = dx == 0.0;
    s.value = s.degenerate ? 0.0 : num / dx;
    out.push_back(s);
  }
  return out;
}

TEST(Monotonicity, Examples) {
  const auto s = Samples({{1.0, 2.0}, {-1.0, -0.5}, {2.0, -1.0}, {0.0, 0.0}, {0.0, 0.3}});
  const auto pos = Monotonicity(s, 0, Sign::kPositive);
  EXPECT_EQ(pos.n_pairs, 5u);
  EXPECT_EQ(pos.n_dummy, 2u);
  EXPECT_EQ(pos.n_matched, 3u);
  EXPECT_DOUBLE_EQ(pos.fraction, 0.6);
  const auto neg = Monotonicity(s, 0, Sign::kNegative);
  EXPECT_EQ(neg.n_matched, 2u);
  EXPECT_EQ(Monotonicity(s, 3, Sign::kPositive).fraction, 0.0);
}

TEST(Monotonicity, ReportNeedsSigns) {
  const auto s = Samples({{1.0, 1.0}});
  const std::vector<std::size_t> audited{0};
  const std::vector<std::optional<Sign>> none{std::nullopt};
  EXPECT_EQ(KindOf([&] { MonotonicityReport(s, audited, none); }), ErrorKind::kConfig);
  const std::vector<std::optional<Sign>> plus{Sign::kPositive};
  EXPECT_EQ(MonotonicityReport(s, audited, plus).front().fraction, 1.0);
}

TEST(DummyRatio, Examples) {
  const auto s = Samples({{0.0, 0.0}, {0.0, 0.0}, {0.0, 1e-17}, {0.0, 0.0}, {1.0, 5.0}});
  EXPECT_EQ(*DummyRatio(s, 0), 0.75);
  const auto none = Samples({{1.0, 1.0}});
  EXPECT_FALSE(DummyRatio(none, 0));
}

TEST(Spearman, Examples) {
  const std::vector<double> a{1, 2, 2, 3, 5}, b{2, 1, 4, 4, 9};
  EXPECT_NEAR(*Spearman(a, b), 0.7631578947368421, 1e-12);
  EXPECT_EQ(*Spearman(a, a), 1.0);
  const std::vector<double> rev{-1, -2, -2, -3, -5};
  EXPECT_EQ(*Spearman(a, rev), -1.0);
  const std::vector<double> flat{1, 1, 1, 1, 1};
  EXPECT_FALSE(Spearman(a, flat));
  const std::vector<double> one{1};
  EXPECT_FALSE(Spearman(one, one));
}

TEST(Spearman, InvariantUnderMonotoneTransforms) {
  Rng rng(2);
  std::vector<double> a(30), b(30), ea(30), cb(30);
  for (std::size_t i = 0; i < 30; ++i) {
    a[i] = rng.Uniform(-2, 2);
    b[i] = a[i] + rng.Normal();
    ea[i] = std::exp(a[i]);
    cb[i] = b[i] * b[i] * b[i];
  }
  EXPECT_NEAR(*Spearman(a, b), *Spearman(ea, cb), 1e-12);
}

TEST(Signs, FromPredictionCorrelation) {
  const Dataset u = testing::UniformData(50, 2, 4);
  Matrix rows;
  for (std::size_t r = 0; r < 50; ++r) rows.AppendRow(std::vector<double>{u.row(r)[0], u.row(r)[1], 0.5});
  const Dataset d({"a", "b", "c"}, std::vector<FeatureKind>(3, FeatureKind::kContinuous), rows);
  std::vector<double> y;
  for (std::size_t r = 0; r < 50; ++r) y.push_back(2.0 * d.row(r)[0] - d.row(r)[1]);
  const auto signs = CorrelationSigns(d, y);
  EXPECT_EQ(signs[0], Sign::kPositive);
  EXPECT_EQ(signs[1], Sign::kNegative);
  EXPECT_FALSE(signs[2]);
}

TEST(DeltaGrid, Parsing) {
  EXPECT_EQ(ParseDeltaGrid("-0.2:0.2:0.1"), (std::vector<double>{-0.2, -0.1, 0.1, 0.2}));
  EXPECT_EQ(ParseDeltaGrid("-250:250:50").size(), 10u);
  EXPECT_EQ(ParseDeltaGrid("1:3:1"), (std::vector<double>{1, 2, 3}));
  for (const char* bad : {"1:2", "a:b:c", "0:1:0", "2:1:1", "0:0:1"}) {
    EXPECT_EQ(KindOf([&] { ParseDeltaGrid(bad); }), ErrorKind::kConfig) << bad;
  }
}

TEST(Perturbation, LinearModelTracksPrediction) {
  const LinearModel m({2.0, -1.0}, 0.0);
  const Dataset rows = testing::UniformData(10, 2, 3);
  PerturbationOptions opt;
  opt.feature = 0;
  opt.deltas = {-0.5, 0.25, 1.0};
  opt.valid_min = 0.0;
  MethodConfig pw;
  const auto a = PerturbationTest(rows, m, pw, rows, opt);
  std::size_t skipped = 0;
  for (std::size_t r = 0; r < 10; ++r) skipped += rows.row(r)[0] - 0.5 < 0.0 ? 1 : 0;
  EXPECT_EQ(a.skipped, skipped);
  EXPECT_EQ(a.row.size(), 30u - skipped);
  for (std::size_t c = 0; c < a.row.size(); ++c) {
    EXPECT_EQ(a.attribution_delta[c], a.prediction_delta[c]);
    EXPECT_NEAR(a.prediction_delta[c], 2.0 * a.delta[c], 1e-12);
  }
  MethodConfig ma;
  ma.kind = MethodKind::kMarginalAll;
  const auto b = PerturbationTest(rows, m, ma, rows, opt);
  for (std::size_t c = 0; c < b.row.size(); ++c) {
    EXPECT_NEAR(b.attribution_delta[c], 2.0 * b.delta[c], 1e-12);
  }
}

TEST(Perturbation, ZeroDeltaGivesZero) {
  const auto model = testing::RandomTrees(3, 5, 3, 4);
  const Dataset rows = testing::UniformData(5, 3, 4);
  PerturbationOptions opt;
  opt.feature = 1;
  opt.deltas = {0.0};
  const auto r = PerturbationTest(rows, *model, MethodConfig{}, rows, opt);
  for (std::size_t c = 0; c < r.row.size(); ++c) {
    EXPECT_EQ(r.attribution_delta[c], 0.0);
    EXPECT_EQ(r.prediction_delta[c], 0.0);
  }
}

TEST(Perturbation, Errors) {
  auto spec = SyntheticSpec::Uniform(2);
  spec.features[1].kind = FeatureKind::kBinary;
  const Dataset rows = GenerateSynthetic(5, spec, 1).WithoutTarget();
  const LinearModel m({1.0, 1.0}, 0.0);
  PerturbationOptions opt;
  opt.feature = 1;
  opt.deltas = {1.0};
  EXPECT_EQ(KindOf([&] { PerturbationTest(rows, m, MethodConfig{}, rows, opt); }), ErrorKind::kData);
  opt.feature = 4;
  EXPECT_EQ(KindOf([&] { PerturbationTest(rows, m, MethodConfig{}, rows, opt); }), ErrorKind::kData);
  opt.feature = 0;
  opt.deltas.clear();
  EXPECT_EQ(KindOf([&] { PerturbationTest(rows, m, MethodConfig{}, rows, opt); }), ErrorKind::kConfig);
}

TEST(Benchmark, CountsRowsAndCoalitions) {
  const LinearModel m({1, 1, 1, 1}, 0.0);
  const Dataset bg = testing::UniformData(30, 4, 7);
  std::vector<MethodConfig> methods(3);
  methods[1].kind = MethodKind::kMarginalAll;
  methods[2].kind = MethodKind::kMarginalKmeans;
  methods[2].k = 5;
  BenchmarkOptions opt;
  opt.repeats = 3;
  opt.solver.mode = SolverMode::kExact;
  opt.solver.prune_dummies = false;
  const auto pair = MakePair(testing::ToVector(bg.row(0)), testing::ToVector(bg.row(1)));
  const auto out = Benchmark(methods, pair, bg, m, opt);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0].n_evaluations, 16u);
  EXPECT_EQ(out[1].n_evaluations, 16u * 30u);
  EXPECT_EQ(out[2].n_evaluations, 16u * 5u);
  for (const auto& e : out) {
    EXPECT_EQ(e.n_coalitions, 16u);
    EXPECT_EQ(e.times_ms.size(), 3u);
    EXPECT_GE(e.mean_ms, 0.0);
  }
  opt.repeats = 1;
  EXPECT_EQ(KindOf([&] { Benchmark(methods, pair, bg, m, opt); }), ErrorKind::kConfig);
}

TEST(Heatmap, SingleBinReducesToMonotonicity) {
  const auto model = testing::RandomTrees(3, 10, 3, 9);
  const Dataset bg = testing::UniformData(60, 3, 9);
  const auto pairs = SelectPairsBatch(bg, bg, PairStrategy{SimilarStrategy{}}, {true, 1});
  const auto ex = ExplainPairs(pairs, *model, SolverConfig{});
  const std::vector<std::optional<Sign>> signs{Sign::kPositive, Sign::kNegative, std::nullopt};
  const auto cells = SimilarityHeatmap(ex, signs, 1);
  ASSERT_EQ(cells.size(), 3u);
  const auto samples = NormalizePairwise(ex);
  EXPECT_EQ(*cells[0].matched_fraction, Monotonicity(samples, 0, Sign::kPositive).fraction);
  EXPECT_EQ(*cells[1].matched_fraction, Monotonicity(samples, 1, Sign::kNegative).fraction);
  EXPECT_FALSE(cells[2].matched_fraction);
  EXPECT_EQ(cells[0].n_pairs, 60u);
  EXPECT_EQ(KindOf([&] { SimilarityHeatmap(ex, signs, 0); }), ErrorKind::kConfig);
}

TEST(Heatmap, LinearModelRanksPerfectly) {
  const LinearModel m({1.0, -3.0}, 0.0);
  const Dataset bg = testing::UniformData(80, 2, 10);
  const auto pairs = SelectPairsBatch(bg, bg, PairStrategy{SimilarStrategy{}}, {true, 1});
  const auto ex = ExplainPairs(pairs, m, SolverConfig{});
  const std::vector<std::optional<Sign>> signs{Sign::kPositive, Sign::kNegative};
  for (const auto& c : SimilarityHeatmap(ex, signs, 4)) {
    EXPECT_EQ(*c.matched_fraction, 1.0);
    if (c.spearman) {
      EXPECT_NEAR(std::abs(*c.spearman), 1.0, 1e-12);
    }
  }
}

// Off-manifold sensitivity: x2 tracks x1 closely, and the model punishes
// any gap between them. Near pairs keep hybrids on the data manifold, far
// pairs mix x1 and x2 from different rows.
TEST(Heatmap, CloserPairsAreMoreMonotone) {
  SyntheticSpec spec;
  spec.features.resize(3);
  spec.features[0].name = "x0";
  spec.features[1].name = "x1";
  spec.features[2].name = "x2";
  spec.features[2].source = "x1";
  spec.features[2].jitter = 0.05;
  spec.weights = {0, 0, 0};
  const Dataset bg = GenerateSynthetic(300, spec, 11).WithoutTarget();
  const testing::FunctionPredictor f(3, [](std::span<const double> x) {
    const double g = x[1] - x[2];
    return x[0] * (1.0 - 16.0 * g * g);
  });
  const auto pairs = SelectPairsBatch(bg, bg, PairStrategy{RandomStrategy{3}}, {true, 1});
  auto ex = ExplainPairs(pairs, f, SolverConfig{});
  const FeatureStats stats = ComputeStats(bg);
  for (auto& e : ex) {
    e.similarity = Similarity(e.target, e.reference, Metric::kEuclidean, &stats, bg.kinds()).value;
  }
  // Independent check of the explanations themselves.
  for (std::size_t i = 0; i < ex.size(); i += 25) {
    const auto want = testing::PermutationShapley(3, [&](std::uint64_t m) {
      return f.PredictOne(Hybrid(ex[i].target, ex[i].reference, m));
    });
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(ex[i].phi[k], want[k], 1e-12);
  }
  const std::vector<std::optional<Sign>> signs{Sign::kPositive, std::nullopt, std::nullopt};
  const auto cells = SimilarityHeatmap(ex, signs, 4);
  std::optional<double> nearest, farthest;
  for (const auto& c : cells) {
    if (c.feature != 0) continue;
    if (!nearest) nearest = c.matched_fraction;
    farthest = c.matched_fraction;
  }
  ASSERT_TRUE(nearest && farthest);
  EXPECT_GT(*nearest, *farthest);
  EXPECT_EQ(*nearest, 1.0);
}

}  // namespace
}  // namespace pairshap
