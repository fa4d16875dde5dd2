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

#include "pairshap/config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json_config.hpp"
#include "pairshap/error.hpp"

namespace pairshap {
namespace internal {

Json ParseJsonText(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    ThrowConfig(what + ": invalid JSON (" + e.what() + ")");
  }
}

Json ResolveJsonArgument(const std::string& text, const std::string& what) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (text[first] == '{' || text[first] == '[')) {
    return ParseJsonText(text, what);
  }
  std::error_code ec;
  if (!text.empty() && std::filesystem::is_regular_file(text, ec)) {
    std::ifstream in(text, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (!in && !in.eof()) ThrowConfig(what + ": cannot read '" + text + "'");
    return ParseJsonText(buf.str(), what + " file '" + text + "'");
  }
  return Json(text);
}

void RejectUnknownKeys(const Json& obj, std::initializer_list<const char*> allowed,
                       const std::string& what) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) ThrowConfig(what + ": unknown key '" + key + "'");
  }
}

std::uint64_t GetUint(const Json& obj, const char* key, std::uint64_t fallback,
                      const std::string& what) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (it->is_number_unsigned()) return it->get<std::uint64_t>();
  if (it->is_number_integer() && it->get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(it->get<std::int64_t>());
  }
  ThrowConfig(what + ": '" + key + "' must be a non-negative integer");
}

double GetNumber(const Json& obj, const char* key, double fallback, const std::string& what) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number()) ThrowConfig(what + ": '" + key + "' must be a number");
  return it->get<double>();
}

bool GetBool(const Json& obj, const char* key, bool fallback, const std::string& what) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_boolean()) ThrowConfig(what + ": '" + key + "' must be true or false");
  return it->get<bool>();
}

std::string GetString(const Json& obj, const char* key, const std::string& fallback,
                      const std::string& what) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_string()) ThrowConfig(what + ": '" + key + "' must be a string");
  return it->get<std::string>();
}

namespace {

Json AsObject(const Json& value, const char* tag_key, const std::string& what) {
  if (value.is_string()) return Json{{tag_key, value.get<std::string>()}};
  if (!value.is_object()) ThrowConfig(what + " must be a JSON object or a tag");
  return value;
}

}  // namespace

MethodConfig MethodFromJson(const Json& value, std::uint64_t default_seed) {
  const std::string what = "method config";
  const Json obj = AsObject(value, "method", what);
  RejectUnknownKeys(obj, {"method", "n_samples", "n_background", "k", "sigma", "seed"}, what);
  if (!obj.contains("method")) ThrowConfig(what + ": missing 'method'");
  MethodConfig c;
  c.kind = ParseMethodTag(GetString(obj, "method", "", what));
  c.n_samples = GetUint(obj, "n_samples", c.n_samples, what);
  c.n_background = GetUint(obj, "n_background", c.n_background, what);
  c.k = GetUint(obj, "k", c.k, what);
  if (obj.contains("sigma") && !obj["sigma"].is_null()) {
    c.sigma = GetNumber(obj, "sigma", 0.0, what);
  }
  c.seed = GetUint(obj, "seed", default_seed, what);
  ValidateMethod(c);
  return c;
}

PairStrategy StrategyFromJson(const Json& value, std::uint64_t default_seed) {
  const std::string what = "strategy config";
  const Json obj = AsObject(value, "strategy", what);
  RejectUnknownKeys(obj,
                    {"strategy", "seed", "metric", "standardized", "conditions",
                     "fallback_metric", "exclude_duplicates"},
                    what);
  const std::string name = GetString(obj, "strategy", "", what);
  PairStrategy s;
  s.exclude_duplicates = GetBool(obj, "exclude_duplicates", false, what);
  if (name == "random") {
    s.kind = RandomStrategy{GetUint(obj, "seed", default_seed, what)};
  } else if (name == "similar") {
    SimilarStrategy sim;
    sim.metric = ParseMetric(GetString(obj, "metric", "euclidean", what));
    sim.standardized = GetBool(obj, "standardized", true, what);
    s.kind = sim;
  } else if (name == "comparable") {
    ComparableStrategy cmp;
    cmp.fallback_metric = ParseMetric(GetString(obj, "fallback_metric", "euclidean", what));
    cmp.standardized = GetBool(obj, "standardized", true, what);
    const auto it = obj.find("conditions");
    if (it == obj.end() || !it->is_array()) {
      ThrowConfig(what + ": comparable strategy needs a 'conditions' array");
    }
    for (const auto& cond : *it) {
      if (!cond.is_object()) ThrowConfig(what + ": each condition must be an object");
      RejectUnknownKeys(cond, {"feature", "mode", "epsilon"}, what + " condition");
      MatchCondition mc;
      mc.feature = GetString(cond, "feature", "", what);
      const std::string mode = GetString(cond, "mode", "exact", what);
      if (mode == "tolerance") {
        if (!cond.contains("epsilon")) ThrowConfig(what + ": tolerance condition needs 'epsilon'");
        mc.tolerance = GetNumber(cond, "epsilon", 0.0, what);
      } else if (mode != "exact") {
        ThrowConfig(what + ": condition mode must be 'exact' or 'tolerance'");
      }
      cmp.conditions.push_back(std::move(mc));
    }
    s.kind = cmp;
  } else {
    ThrowConfig("unknown strategy '" + name + "' (expected random, similar or comparable)");
  }
  ValidateStrategy(s);
  return s;
}

SolverConfig SolverFromJson(const Json& value, std::uint64_t default_seed) {
  const std::string what = "solver config";
  const Json obj = AsObject(value, "mode", what);
  RejectUnknownKeys(obj, {"mode", "n_coalitions", "seed", "prune_dummies", "exact_threshold"},
                    what);
  SolverConfig c;
  c.mode = ParseSolverMode(GetString(obj, "mode", "auto", what));
  c.n_coalitions = GetUint(obj, "n_coalitions", c.n_coalitions, what);
  c.seed = GetUint(obj, "seed", default_seed, what);
  c.prune_dummies = GetBool(obj, "prune_dummies", c.prune_dummies, what);
  c.exact_threshold = GetUint(obj, "exact_threshold", c.exact_threshold, what);
  ValidateSolver(c);
  return c;
}

OrderedJson MethodToJson(const MethodConfig& c) {
  OrderedJson j;
  j["method"] = MethodTag(c.kind);
  switch (c.kind) {
    case MethodKind::kUniform:
      j["n_samples"] = c.n_samples;
      j["seed"] = c.seed;
      break;
    case MethodKind::kMarginalAll:
      j["n_background"] = c.n_background;
      j["seed"] = c.seed;
      break;
    case MethodKind::kMarginalKmeans:
      j["k"] = c.k;
      j["seed"] = c.seed;
      break;
    case MethodKind::kConditionalEmpirical:
      j["n_samples"] = c.n_samples;
      if (c.sigma) {
        j["sigma"] = *c.sigma;
      } else {
        j["sigma"] = nullptr;
      }
      break;
    default:
      break;
  }
  return j;
}

OrderedJson StrategyToJson(const PairStrategy& s) {
  OrderedJson j;
  j["strategy"] = s.name();
  if (const auto* r = std::get_if<RandomStrategy>(&s.kind)) {
    j["seed"] = r->seed;
  } else if (const auto* sim = std::get_if<SimilarStrategy>(&s.kind)) {
    j["metric"] = ToString(sim->metric);
    j["standardized"] = sim->standardized;
  } else {
    const auto& cmp = std::get<ComparableStrategy>(s.kind);
    OrderedJson conds = OrderedJson::array();
    for (const auto& c : cmp.conditions) {
      OrderedJson cj;
      cj["feature"] = c.feature;
      cj["mode"] = c.tolerance ? "tolerance" : "exact";
      if (c.tolerance) cj["epsilon"] = *c.tolerance;
      conds.push_back(cj);
    }
    j["conditions"] = conds;
    j["fallback_metric"] = ToString(cmp.fallback_metric);
    j["standardized"] = cmp.standardized;
  }
  j["exclude_duplicates"] = s.exclude_duplicates;
  return j;
}

OrderedJson SolverToJson(const SolverConfig& c) {
  OrderedJson j;
  j["mode"] = ToString(c.mode);
  j["n_coalitions"] = c.n_coalitions;
  j["seed"] = c.seed;
  j["prune_dummies"] = c.prune_dummies;
  j["exact_threshold"] = c.exact_threshold;
  return j;
}

}  // namespace internal

MethodConfig ParseMethodConfig(const std::string& text, std::uint64_t default_seed) {
  return internal::MethodFromJson(internal::ResolveJsonArgument(text, "method config"),
                                  default_seed);
}

PairStrategy ParseStrategyConfig(const std::string& text, std::uint64_t default_seed) {
  return internal::StrategyFromJson(internal::ResolveJsonArgument(text, "strategy config"),
                                    default_seed);
}

SolverConfig ParseSolverConfig(const std::string& text, std::uint64_t default_seed) {
  return internal::SolverFromJson(internal::ResolveJsonArgument(text, "solver config"),
                                  default_seed);
}

std::string MethodConfigToJson(const MethodConfig& config) {
  return internal::MethodToJson(config).dump();
}

std::string StrategyConfigToJson(const PairStrategy& strategy) {
  return internal::StrategyToJson(strategy).dump();
}

std::string SolverConfigToJson(const SolverConfig& config) {
  return internal::SolverToJson(config).dump();
}

}  // namespace pairshap
