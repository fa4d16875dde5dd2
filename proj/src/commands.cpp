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

#include "pairshap/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>

#include "json_config.hpp"
#include "pairshap/data.hpp"
#include "pairshap/diagnostics.hpp"
#include "pairshap/error.hpp"
#include "pairshap/export.hpp"
#include "pairshap/model.hpp"
#include "pairshap/pairing.hpp"
#include "pairshap/shapley.hpp"
#include "pairshap/valuefn.hpp"

namespace pairshap {

namespace {

using internal::GetBool;
using internal::GetNumber;
using internal::GetString;
using internal::GetUint;
using internal::Json;
using internal::OrderedJson;

constexpr const char* kWhat = "run config";

struct Context {
  std::string command;
  Json cfg;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::string out;
  // Everything that determines the artifacts; embedded in each of them.
  OrderedJson resolved;

  bool has(const char* key) const { return cfg.contains(key) && !cfg[key].is_null(); }
  std::string path(const std::string& name) const {
    return (std::filesystem::path(out) / name).string();
  }
};

void Write(const Context& ctx, const std::string& name, const std::string& content) {
  WriteFileAtomic(ctx.path(name), content);
}

std::string Dump(const OrderedJson& j) { return j.dump(2) + "\n"; }

std::string ReadText(const std::string& path, const std::string& what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) ThrowData("cannot open " + what + " '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Context MakeContext(const std::string& command, const std::string& config_json) {
  Context ctx;
  ctx.command = command;
  ctx.cfg = internal::ParseJsonText(config_json.empty() ? "{}" : config_json, kWhat);
  if (!ctx.cfg.is_object()) ThrowConfig("run config must be a JSON object");
  internal::RejectUnknownKeys(
      ctx.cfg,
      {"dataset", "target", "kinds", "model", "external_cmd", "raw_output", "batch_size",
       "timeout_ms", "method", "methods", "strategy", "comparable", "solver", "seed", "jobs",
       "out", "top_k", "repeats", "feature", "deltas", "bins", "targets", "limit", "signs",
       "n_rows", "n_features", "spec", "row", "valid_min", "valid_max"},
      kWhat);
  ctx.seed = GetUint(ctx.cfg, "seed", 0, kWhat);
  ctx.jobs = GetUint(ctx.cfg, "jobs", 1, kWhat);
  if (ctx.jobs == 0) ThrowConfig("jobs must be >= 1");
  ctx.out = GetString(ctx.cfg, "out", "", kWhat);
  if (ctx.out.empty()) ThrowConfig(command + " needs an output directory (--out)");
  ctx.resolved["command"] = command;
  ctx.resolved["seed"] = ctx.seed;
  ctx.resolved["jobs"] = ctx.jobs;
  return ctx;
}

CsvOptions MakeCsvOptions(const Context& ctx) {
  CsvOptions opt;
  if (ctx.has("target")) opt.target_column = GetString(ctx.cfg, "target", "", kWhat);
  if (ctx.has("kinds")) {
    const Json& kinds = ctx.cfg["kinds"];
    if (!kinds.is_object()) ThrowConfig("'kinds' must map feature names to kinds");
    for (const auto& [name, kind] : kinds.items()) {
      if (!kind.is_string()) ThrowConfig("kind of '" + name + "' must be a string");
      opt.kind_overrides[name] = ParseFeatureKind(kind.get<std::string>());
    }
  }
  return opt;
}

Dataset LoadDataset(Context& ctx) {
  if (!ctx.has("dataset")) ThrowConfig(ctx.command + " needs --dataset");
  const std::string path = GetString(ctx.cfg, "dataset", "", kWhat);
  const CsvOptions opt = MakeCsvOptions(ctx);
  Dataset data = LoadCsv(path, opt);
  ctx.resolved["dataset"] = path;
  ctx.resolved["target"] = opt.target_column ? OrderedJson(*opt.target_column) : nullptr;
  OrderedJson kinds = OrderedJson::object();
  for (std::size_t k = 0; k < data.n_features(); ++k) kinds[data.names()[k]] = ToString(data.kinds()[k]);
  ctx.resolved["kinds"] = kinds;
  return data;
}

std::unique_ptr<Predictor> LoadPredictor(Context& ctx, const Dataset& data) {
  const bool raw = GetBool(ctx.cfg, "raw_output", false, kWhat);
  std::unique_ptr<Predictor> model;
  if (ctx.has("model") && ctx.has("external_cmd")) {
    ThrowConfig("give either --model or --external-cmd, not both");
  }
  if (ctx.has("model")) {
    ModelLoadOptions opt;
    opt.expected_features = data.names();
    opt.raw_output = raw;
    const std::string path = GetString(ctx.cfg, "model", "", kWhat);
    model = LoadModel(path, opt);
    ctx.resolved["model"] = path;
  } else if (ctx.has("external_cmd")) {
    ExternalPredictorOptions opt;
    opt.batch_size = GetUint(ctx.cfg, "batch_size", opt.batch_size, kWhat);
    if (opt.batch_size == 0) ThrowConfig("batch_size must be >= 1");
    opt.timeout = std::chrono::milliseconds(
        GetUint(ctx.cfg, "timeout_ms", static_cast<std::uint64_t>(opt.timeout.count()), kWhat));
    const std::string cmd = GetString(ctx.cfg, "external_cmd", "", kWhat);
    model = std::make_unique<ExternalPredictor>(cmd, opt);
    ctx.resolved["external_cmd"] = cmd;
    ctx.resolved["batch_size"] = opt.batch_size;
  } else {
    ThrowConfig(ctx.command + " needs --model or --external-cmd");
  }
  if (model->n_features() != data.n_features()) {
    ThrowData("model expects " + std::to_string(model->n_features()) +
              " features but the dataset has " + std::to_string(data.n_features()));
  }
  ctx.resolved["raw_output"] = raw;
  return model;
}

Dataset Head(const Dataset& data, std::size_t limit) {
  if (limit == 0 || limit >= data.n_rows()) return data;
  std::vector<std::size_t> idx(limit);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return data.Subset(idx);
}

std::size_t Limit(Context& ctx, std::size_t fallback) {
  const std::size_t limit = GetUint(ctx.cfg, "limit", fallback, kWhat);
  ctx.resolved["limit"] = limit;
  return limit;
}

Json ArgumentValue(const Json& v, const std::string& what) {
  if (v.is_string()) return internal::ResolveJsonArgument(v.get<std::string>(), what);
  return v;
}

MethodConfig Method(Context& ctx, const char* fallback) {
  const Json value =
      ctx.has("method") ? ArgumentValue(ctx.cfg["method"], "method config") : Json(fallback);
  MethodConfig m = internal::MethodFromJson(value, ctx.seed);
  ctx.resolved["method"] = internal::MethodToJson(m);
  return m;
}

PairStrategy Strategy(Context& ctx, const char* fallback) {
  const Json value =
      ctx.has("strategy") ? ArgumentValue(ctx.cfg["strategy"], "strategy config") : Json(fallback);
  PairStrategy s = internal::StrategyFromJson(value, ctx.seed);
  ctx.resolved["strategy"] = internal::StrategyToJson(s);
  return s;
}

SolverConfig Solver(Context& ctx) {
  const Json value =
      ctx.has("solver") ? ArgumentValue(ctx.cfg["solver"], "solver config") : Json("auto");
  SolverConfig s = internal::SolverFromJson(value, ctx.seed);
  ctx.resolved["solver"] = internal::SolverToJson(s);
  return s;
}

std::vector<std::string> StringList(const Context& ctx, const char* key,
                                    const std::vector<std::string>& fallback) {
  if (!ctx.has(key)) return fallback;
  const Json& v = ctx.cfg[key];
  std::vector<std::string> out;
  if (v.is_string()) {
    std::stringstream ss(v.get<std::string>());
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) out.push_back(item);
    }
  } else if (v.is_array()) {
    for (const auto& item : v) {
      if (!item.is_string()) ThrowConfig(std::string("'") + key + "' entries must be strings");
      out.push_back(item.get<std::string>());
    }
  } else {
    ThrowConfig(std::string("'") + key + "' must be a list or comma-separated string");
  }
  if (out.empty()) ThrowConfig(std::string("'") + key + "' is empty");
  return out;
}

MethodConfig MethodFromToken(const std::string& token, std::uint64_t seed) {
  return internal::MethodFromJson(internal::ResolveJsonArgument(token, "method config"), seed);
}

void WriteRunConfig(const Context& ctx) { Write(ctx, "run_config.json", Dump(ctx.resolved)); }

std::string Summary(const Context& ctx, OrderedJson fields) {
  OrderedJson s;
  s["command"] = ctx.command;
  s["out"] = ctx.out;
  for (auto& [k, v] : fields.items()) s[k] = v;
  return s.dump();
}

// synth ---------------------------------------------------------------------

std::string CmdSynth(Context& ctx) {
  SyntheticSpec spec;
  if (ctx.has("spec")) {
    const std::string arg = GetString(ctx.cfg, "spec", "", kWhat);
    const auto first = arg.find_first_not_of(" \t\r\n");
    const bool inline_json = first != std::string::npos && arg[first] == '{';
    spec = ParseSyntheticSpec(inline_json ? arg : ReadText(arg, "synthetic spec"));
    if (ctx.has("n_features") &&
        GetUint(ctx.cfg, "n_features", 0, kWhat) != spec.features.size()) {
      ThrowConfig("n_features disagrees with the spec's feature list");
    }
  } else {
    const std::size_t n = GetUint(ctx.cfg, "n_features", 12, kWhat);
    if (n < 2) ThrowConfig("synthetic data needs n_features >= 2");
    spec = SyntheticSpec::Uniform(n);
  }
  const std::size_t n_rows = GetUint(ctx.cfg, "n_rows", 500, kWhat);
  if (n_rows == 0) ThrowConfig("n_rows must be >= 1");
  const Dataset data = GenerateSynthetic(n_rows, spec, ctx.seed);
  ctx.resolved["n_rows"] = n_rows;
  ctx.resolved["spec"] = OrderedJson::parse(SyntheticSpecToJson(spec));

  std::vector<std::string> names;
  for (const auto& f : spec.features) names.push_back(f.name);
  const LinearModel truth(spec.weights, spec.intercept, Link::kIdentity, names);

  Write(ctx, "synthetic.csv", FormatCsv(data));
  OrderedJson echo = OrderedJson::parse(SyntheticSpecToJson(spec));
  echo["run_config"] = ctx.resolved;
  Write(ctx, "synthetic_spec.json", Dump(echo));
  Write(ctx, "model.json", ModelToJson(truth));
  WriteRunConfig(ctx);
  return Summary(ctx, {{"rows", n_rows}, {"features", names.size()}});
}

// pairs ---------------------------------------------------------------------

struct Targets {
  Dataset rows;
  bool from_background = true;
};

Targets LoadTargets(Context& ctx, const Dataset& data, std::size_t default_limit) {
  Targets t;
  const std::size_t limit = Limit(ctx, default_limit);
  if (ctx.has("targets")) {
    const std::string path = GetString(ctx.cfg, "targets", "", kWhat);
    t.rows = Head(LoadCsv(path, MakeCsvOptions(ctx)), limit);
    if (t.rows.names() != data.names()) {
      ThrowData("targets file '" + path + "' has different feature columns than the dataset");
    }
    t.from_background = false;
    ctx.resolved["targets"] = path;
  } else {
    t.rows = Head(data, limit);
  }
  return t;
}

std::string CmdPairs(Context& ctx) {
  const Dataset data = LoadDataset(ctx);
  const PairStrategy strategy = Strategy(ctx, "similar");
  const Targets targets = LoadTargets(ctx, data, 0);
  PairBatchOptions opt;
  opt.jobs = ctx.jobs;
  opt.targets_are_background = targets.from_background;
  const auto pairs = SelectPairsBatch(targets.rows, data, strategy, opt);
  Write(ctx, "pairs.csv", PairsCsv(pairs));
  WriteRunConfig(ctx);
  std::size_t fallbacks = 0;
  for (const auto& p : pairs) fallbacks += p.fallback ? 1 : 0;
  return Summary(ctx, {{"pairs", pairs.size()}, {"fallbacks", fallbacks}});
}

// explain -------------------------------------------------------------------

std::string CmdExplain(Context& ctx) {
  const Dataset data = LoadDataset(ctx);
  const auto model = LoadPredictor(ctx, data);
  const MethodConfig method = Method(ctx, "pairwise");
  PairStrategy strategy;
  if (IsPairwise(method.kind)) strategy = Strategy(ctx, "similar");
  const SolverConfig solver = Solver(ctx);
  const std::size_t top_k = GetUint(ctx.cfg, "top_k", 10, kWhat);
  ctx.resolved["top_k"] = top_k;
  const Targets targets = LoadTargets(ctx, data, 0);

  BatchOptions opt;
  opt.jobs = ctx.jobs;
  opt.targets_are_background = targets.from_background;
  const auto explanations =
      ExplainBatch(targets.rows, data, *model, strategy, method, solver, opt);

  const std::string run_config = ctx.resolved.dump();
  double worst = 0.0;
  for (std::size_t i = 0; i < explanations.size(); ++i) {
    const auto& e = explanations[i];
    char name[64];
    std::snprintf(name, sizeof name, "explanations/row_%05zu.json", e.target_row.value_or(i));
    Write(ctx, name, ExplanationToJson(e, data.names(), run_config));
    worst = std::max(worst, std::abs(e.EfficiencyResidual()) / std::max(1.0, std::abs(e.prediction)));
  }
  Write(ctx, "explanations.csv", ExplanationsCsv(explanations, data.names()));
  Write(ctx, "waterfall.csv", WaterfallCsv(explanations, data.names(), top_k));
  WriteRunConfig(ctx);
  return Summary(ctx, {{"explanations", explanations.size()},
                       {"max_relative_efficiency_residual", worst}});
}

// diagnose ------------------------------------------------------------------

std::vector<std::optional<Sign>> ResolveSigns(Context& ctx, const Dataset& rows,
                                              const Predictor& model) {
  std::vector<std::optional<Sign>> signs(rows.n_features());
  OrderedJson echo = OrderedJson::object();
  if (ctx.has("signs")) {
    const Json& v = ctx.cfg["signs"];
    std::vector<std::pair<std::string, std::string>> items;
    if (v.is_string()) {
      std::stringstream ss(v.get<std::string>());
      std::string item;
      while (std::getline(ss, item, ',')) {
        const auto colon = item.rfind(':');
        if (colon == std::string::npos) ThrowConfig("sign entry '" + item + "' is not name:+ or name:-");
        items.emplace_back(item.substr(0, colon), item.substr(colon + 1));
      }
    } else if (v.is_object()) {
      for (const auto& [name, sign] : v.items()) {
        if (!sign.is_string()) ThrowConfig("sign of '" + name + "' must be \"+\" or \"-\"");
        items.emplace_back(name, sign.get<std::string>());
      }
    } else {
      ThrowConfig("'signs' must be \"name:+,name:-\" or an object");
    }
    for (const auto& [name, sign] : items) {
      const auto k = rows.FindFeature(name);
      if (!k) ThrowConfig("sign given for unknown feature '" + name + "'");
      if (sign == "+") {
        signs[*k] = Sign::kPositive;
      } else if (sign == "-") {
        signs[*k] = Sign::kNegative;
      } else {
        ThrowConfig("sign of '" + name + "' must be + or -");
      }
    }
    ctx.resolved["signs_source"] = "declared";
  } else {
    signs = CorrelationSigns(rows, model.Predict(rows.rows()));
    ctx.resolved["signs_source"] = "prediction_correlation";
  }
  for (std::size_t k = 0; k < signs.size(); ++k) {
    if (signs[k]) echo[rows.names()[k]] = *signs[k] == Sign::kPositive ? "+" : "-";
  }
  ctx.resolved["signs"] = echo;
  return signs;
}

struct MethodRun {
  std::string token;
  bool pairwise = false;
  std::vector<Explanation> explanations;
  std::vector<NormalizedSample> samples;
};

OrderedJson StatsJson(const std::vector<double>& values) {
  if (values.empty()) return nullptr;
  const DistStats st = ComputeDistStats(values);
  OrderedJson j;
  j["mean"] = st.mean;
  j["std"] = st.std;
  j["skew"] = st.skew ? OrderedJson(*st.skew) : OrderedJson(nullptr);
  j["count"] = st.count;
  return j;
}

std::string OptionalNumber(const std::optional<double>& v) {
  return v ? FormatDouble(*v) : std::string();
}

std::string CmdDiagnose(Context& ctx) {
  const Dataset data = LoadDataset(ctx);
  const auto model = LoadPredictor(ctx, data);
  const SolverConfig solver = Solver(ctx);
  const auto tokens =
      StringList(ctx, "methods", {"b0", "bm", "uf", "ma", "mk", "ca", "pr", "ps"});
  ctx.resolved["methods"] = tokens;
  const std::size_t bins = GetUint(ctx.cfg, "bins", 5, kWhat);
  if (bins == 0) ThrowConfig("bins must be >= 1");
  ctx.resolved["bins"] = bins;
  const Dataset rows = Head(data, Limit(ctx, 200));
  if (rows.n_rows() < 2) ThrowData("diagnose needs at least two explicand rows");
  const auto signs = ResolveSigns(ctx, rows, *model);

  PairBatchOptions popt;
  popt.jobs = ctx.jobs;
  popt.targets_are_background = true;
  PairStrategy random_strategy;
  random_strategy.kind = RandomStrategy{ctx.seed};
  const auto random_pairs = SelectPairsBatch(rows, rows, random_strategy, popt);
  std::vector<std::pair<std::size_t, std::size_t>> index_pairs;
  for (std::size_t i = 0; i < random_pairs.size(); ++i) {
    index_pairs.emplace_back(i, random_pairs[i].reference_row);
  }
  ctx.resolved["pairing_strategy"] = internal::StrategyToJson(random_strategy);

  std::vector<MethodRun> runs;
  for (const auto& token : tokens) {
    MethodRun run;
    run.token = token;
    std::optional<PairStrategy> pairing;
    if (token == "pr") {
      pairing = random_strategy;
    } else if (token == "ps") {
      PairStrategy s;
      s.kind = SimilarStrategy{};
      pairing = s;
    } else if (token == "pc") {
      if (!ctx.has("comparable")) ThrowConfig("method pc needs a comparable strategy (--comparable)");
      PairStrategy s = internal::StrategyFromJson(ArgumentValue(ctx.cfg["comparable"], "comparable strategy"), ctx.seed);
      if (!std::holds_alternative<ComparableStrategy>(s.kind)) {
        ThrowConfig("--comparable must describe a comparable strategy");
      }
      ctx.resolved["comparable"] = internal::StrategyToJson(s);
      pairing = s;
    }
    if (pairing) {
      run.pairwise = true;
      const auto pairs = token == "pr" ? random_pairs : SelectPairsBatch(rows, rows, *pairing, popt);
      run.explanations = ExplainPairs(pairs, *model, solver, ctx.jobs);
      run.samples = NormalizePairwise(run.explanations);
    } else {
      const MethodConfig m = MethodFromToken(token, ctx.seed);
      if (IsPairwise(m.kind)) ThrowConfig("use pr, ps or pc to select pairwise methods in diagnose");
      auto prepared = PreparedMethod::Prepare(m, data);
      run.explanations = ExplainRows(rows, prepared, *model, solver, ctx.jobs);
      run.samples = NormalizeNonPairwise(run.explanations, index_pairs);
    }
    runs.push_back(std::move(run));
  }

  const auto& names = data.names();
  OrderedJson per_method = OrderedJson::object();
  std::string normalized = "method,feature,pair,row_i,row_j,delta_x,numerator,value,degenerate\n";
  std::string beeswarm = "method,row,feature,phi,value\n";
  std::string heatmap = "method,bin,low,high,feature,n_pairs,matched_fraction,spearman\n";
  const FeatureStats row_stats = ComputeStats(rows);
  for (const auto& run : runs) {
    OrderedJson features = OrderedJson::object();
    for (std::size_t k = 0; k < names.size(); ++k) {
      OrderedJson f;
      f["stats"] = StatsJson(FeatureValues(run.samples, k));
      if (signs[k]) {
        const auto m = Monotonicity(run.samples, k, *signs[k]);
        OrderedJson mj;
        mj["expected"] = *signs[k] == Sign::kPositive ? "+" : "-";
        mj["fraction"] = m.fraction;
        mj["n_pairs"] = m.n_pairs;
        mj["n_dummy"] = m.n_dummy;
        mj["n_matched"] = m.n_matched;
        f["monotonicity"] = mj;
      } else {
        f["monotonicity"] = nullptr;
      }
      const auto ratio = DummyRatio(run.samples, k);
      f["dummy_ratio"] = ratio ? OrderedJson(*ratio) : OrderedJson(nullptr);
      features[names[k]] = f;
    }
    per_method[run.token] = features;

    for (const auto& s : run.samples) {
      normalized += run.token + "," + CsvField(names[s.feature]) + "," + std::to_string(s.pair) +
                    "," + (s.row_i ? std::to_string(*s.row_i) : "") + "," +
                    (s.row_j ? std::to_string(*s.row_j) : "") + "," + FormatDouble(s.delta_x) +
                    "," + FormatDouble(s.numerator) + "," + FormatDouble(s.value) + "," +
                    (s.degenerate ? "1" : "0") + "\n";
    }
    for (std::size_t i = 0; i < run.explanations.size(); ++i) {
      const auto& e = run.explanations[i];
      for (std::size_t k = 0; k < names.size(); ++k) {
        const double value = run.pairwise ? e.target[k] - e.reference[k] : e.target[k];
        beeswarm += run.token + "," + std::to_string(e.target_row.value_or(i)) + "," +
                    CsvField(names[k]) + "," + FormatDouble(e.phi[k]) + "," +
                    FormatDouble(value) + "\n";
      }
    }
    if (run.pairwise) {
      // Bucketed by standardized euclidean distance so every strategy shares
      // one scale; bin 0 holds the closest pairs.
      std::vector<Explanation> scored = run.explanations;
      for (auto& e : scored) {
        e.similarity = Similarity(e.target, e.reference, Metric::kEuclidean, &row_stats,
                                  rows.kinds())
                           .value;
      }
      for (const auto& cell : SimilarityHeatmap(scored, signs, bins)) {
        heatmap += run.token + "," + std::to_string(cell.bin) + "," + FormatDouble(cell.low) +
                   "," + FormatDouble(cell.high) + "," + CsvField(names[cell.feature]) + "," +
                   std::to_string(cell.n_pairs) + "," + OptionalNumber(cell.matched_fraction) +
                   "," + OptionalNumber(cell.spearman) + "\n";
      }
    }
  }

  OrderedJson ks = OrderedJson::object();
  for (std::size_t k = 0; k < names.size(); ++k) {
    OrderedJson list = OrderedJson::array();
    for (std::size_t a = 0; a < runs.size(); ++a) {
      const auto va = FeatureValues(runs[a].samples, k);
      if (va.empty()) continue;
      for (std::size_t b = a + 1; b < runs.size(); ++b) {
        const auto vb = FeatureValues(runs[b].samples, k);
        if (vb.empty()) continue;
        const auto r = KsTest(va, vb);
        list.push_back({{"a", runs[a].token}, {"b", runs[b].token}, {"d", r.d}, {"p", r.p}});
      }
    }
    ks[names[k]] = list;
  }

  OrderedJson report;
  report["run_config"] = ctx.resolved;
  report["n_explicands"] = rows.n_rows();
  report["per_method"] = per_method;
  report["ks_matrix"] = ks;
  Write(ctx, "report.json", Dump(report));
  Write(ctx, "normalized.csv", normalized);
  Write(ctx, "beeswarm.csv", beeswarm);
  Write(ctx, "similarity_heatmap.csv", heatmap);
  WriteRunConfig(ctx);
  return Summary(ctx, {{"methods", tokens.size()}, {"explicands", rows.n_rows()}});
}

// perturb -------------------------------------------------------------------

std::string CmdPerturb(Context& ctx) {
  const Dataset data = LoadDataset(ctx);
  const auto model = LoadPredictor(ctx, data);
  const SolverConfig solver = Solver(ctx);
  if (!ctx.has("feature")) ThrowConfig("perturb needs --feature");
  const std::string feature = GetString(ctx.cfg, "feature", "", kWhat);
  const auto k = data.FindFeature(feature);
  if (!k) ThrowData("unknown feature '" + feature + "'");
  std::vector<double> deltas;
  if (ctx.has("deltas") && ctx.cfg["deltas"].is_array()) {
    for (const auto& d : ctx.cfg["deltas"]) {
      if (!d.is_number()) ThrowConfig("deltas must be numbers");
      deltas.push_back(d.get<double>());
    }
  } else {
    deltas = ParseDeltaGrid(GetString(ctx.cfg, "deltas", "-250:250:50", kWhat));
  }
  if (deltas.empty()) ThrowConfig("perturb needs at least one non-zero delta");
  std::vector<std::string> tokens;
  if (ctx.has("methods")) {
    tokens = StringList(ctx, "methods", {});
  } else if (ctx.has("method")) {
    tokens = {MethodTag(Method(ctx, "pairwise").kind)};
  } else {
    tokens = {"pairwise", "ma"};
  }
  const Dataset rows = Head(data, Limit(ctx, 500));
  PerturbationOptions opt;
  opt.feature = *k;
  opt.deltas = deltas;
  if (ctx.has("valid_min")) opt.valid_min = GetNumber(ctx.cfg, "valid_min", 0.0, kWhat);
  if (ctx.has("valid_max")) opt.valid_max = GetNumber(ctx.cfg, "valid_max", 0.0, kWhat);
  opt.solver = solver;
  opt.jobs = ctx.jobs;
  ctx.resolved["feature"] = feature;
  ctx.resolved["deltas"] = deltas;
  ctx.resolved["valid_min"] = opt.valid_min ? OrderedJson(*opt.valid_min) : nullptr;
  ctx.resolved["valid_max"] = opt.valid_max ? OrderedJson(*opt.valid_max) : nullptr;

  std::string violin = "method,row,delta,series,value\n";
  OrderedJson per_method = OrderedJson::object();
  OrderedJson method_configs = OrderedJson::array();
  for (const auto& token : tokens) {
    const MethodConfig m = MethodFromToken(token, ctx.seed);
    method_configs.push_back(internal::MethodToJson(m));
    const auto r = PerturbationTest(rows, *model, m, data, opt);
    const std::string tag = MethodTag(m.kind);
    bool identical = true;
    double max_diff = 0.0;
    for (std::size_t i = 0; i < r.row.size(); ++i) {
      const std::string prefix =
          tag + "," + std::to_string(r.row[i]) + "," + FormatDouble(r.delta[i]) + ",";
      violin += prefix + "prediction," + FormatDouble(r.prediction_delta[i]) + "\n";
      violin += prefix + "attribution," + FormatDouble(r.attribution_delta[i]) + "\n";
      identical = identical && r.prediction_delta[i] == r.attribution_delta[i];
      max_diff = std::max(max_diff, std::abs(r.prediction_delta[i] - r.attribution_delta[i]));
    }
    OrderedJson s;
    s["n"] = r.row.size();
    s["skipped"] = r.skipped;
    s["identical"] = identical;
    s["max_abs_difference"] = max_diff;
    if (!r.row.empty()) {
      const auto ks = KsTest(r.prediction_delta, r.attribution_delta);
      s["ks"] = {{"d", ks.d}, {"p", ks.p}};
    } else {
      s["ks"] = nullptr;
    }
    per_method[tag] = s;
  }
  ctx.resolved["methods"] = method_configs;
  OrderedJson summary;
  summary["run_config"] = ctx.resolved;
  summary["per_method"] = per_method;
  Write(ctx, "violin.csv", violin);
  Write(ctx, "perturb_summary.json", Dump(summary));
  WriteRunConfig(ctx);
  return Summary(ctx, {{"rows", rows.n_rows()}, {"deltas", deltas.size()}});
}

// bench ---------------------------------------------------------------------

std::string CmdBench(Context& ctx) {
  const Dataset data = LoadDataset(ctx);
  const auto model = LoadPredictor(ctx, data);
  const SolverConfig solver = Solver(ctx);
  const PairStrategy strategy = Strategy(ctx, "similar");
  const auto tokens = StringList(ctx, "methods", {"pairwise", "ma", "mk", "uf", "b0"});
  const std::size_t repeats = GetUint(ctx.cfg, "repeats", 50, kWhat);
  const std::size_t row = GetUint(ctx.cfg, "row", 0, kWhat);
  if (row >= data.n_rows()) ThrowConfig("row " + std::to_string(row) + " is past the dataset end");
  ctx.resolved["repeats"] = repeats;
  ctx.resolved["row"] = row;

  std::vector<MethodConfig> methods;
  OrderedJson method_configs = OrderedJson::array();
  for (const auto& t : tokens) {
    methods.push_back(MethodFromToken(t, ctx.seed));
    method_configs.push_back(internal::MethodToJson(methods.back()));
  }
  ctx.resolved["methods"] = method_configs;
  const ExplicandPair pair = SelectPair(data.row(row), data, strategy, row);
  BenchmarkOptions opt;
  opt.repeats = repeats;
  opt.solver = solver;
  const auto entries = Benchmark(methods, pair, data, *model, opt);

  std::string csv = "method,repeats,n_evaluations,n_coalitions,mean_ms,std_ms\n";
  OrderedJson results = OrderedJson::array();
  for (const auto& e : entries) {
    csv += std::string(MethodTag(e.method)) + "," + std::to_string(e.times_ms.size()) + "," +
           std::to_string(e.n_evaluations) + "," + std::to_string(e.n_coalitions) + "," +
           FormatDouble(e.mean_ms) + "," + FormatDouble(e.std_ms) + "\n";
    OrderedJson j;
    j["method"] = MethodTag(e.method);
    j["repeats"] = e.times_ms.size();
    j["n_evaluations"] = e.n_evaluations;
    j["n_coalitions"] = e.n_coalitions;
    j["mean_ms"] = e.mean_ms;
    j["std_ms"] = e.std_ms;
    j["times_ms"] = e.times_ms;
    results.push_back(j);
  }
  OrderedJson doc;
  doc["run_config"] = ctx.resolved;
  doc["reference_row"] = pair.reference_row;
  doc["results"] = results;
  Write(ctx, "bench.csv", csv);
  Write(ctx, "bench.json", Dump(doc));
  WriteRunConfig(ctx);
  return Summary(ctx, {{"methods", entries.size()}, {"repeats", repeats}});
}

}  // namespace

const std::vector<std::string>& CommandNames() {
  static const std::vector<std::string> names{"synth",    "pairs",   "explain",
                                              "diagnose", "perturb", "bench"};
  return names;
}

std::string RunCommand(const std::string& command, const std::string& config_json) {
  const auto& names = CommandNames();
  if (std::find(names.begin(), names.end(), command) == names.end()) {
    ThrowConfig("unknown command '" + command + "'");
  }
  Context ctx = MakeContext(command, config_json);
  if (command == "synth") return CmdSynth(ctx);
  if (command == "pairs") return CmdPairs(ctx);
  if (command == "explain") return CmdExplain(ctx);
  if (command == "diagnose") return CmdDiagnose(ctx);
  if (command == "perturb") return CmdPerturb(ctx);
  return CmdBench(ctx);
}

}  // namespace pairshap
