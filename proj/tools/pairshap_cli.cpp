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

// pairshap command line. Flags are collected into a JSON run config and
// handed to ps_run_command().

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pairshap/pairshap.h"

namespace {

using Json = nlohmann::ordered_json;

struct Flags {
  std::map<std::string, std::string> text;
  std::map<std::string, std::uint64_t> count;
  std::map<std::string, double> number;
  std::vector<std::string> kinds;
  bool raw_output = false;
};

const char* KindName(ps_status s) {
  switch (s) {
    case PS_ERR_CONFIG: return "config";
    case PS_ERR_DATA: return "data";
    default: return "runtime";
  }
}

int Report(ps_status status, const std::string& message) {
  std::cerr << "error kind=" << KindName(status) << " code=" << static_cast<int>(status)
            << " message=" << Json(message).dump() << "\n";
  return static_cast<int>(status);
}

void AddText(CLI::App* app, Flags& f, const std::string& flag, const std::string& key,
             const std::string& help) {
  app->add_option_function<std::string>(
      flag, [&f, key](const std::string& v) { f.text[key] = v; }, help);
}

void AddCount(CLI::App* app, Flags& f, const std::string& flag, const std::string& key,
              const std::string& help) {
  app->add_option_function<std::uint64_t>(
      flag, [&f, key](std::uint64_t v) { f.count[key] = v; }, help);
}

void AddNumber(CLI::App* app, Flags& f, const std::string& flag, const std::string& key,
               const std::string& help) {
  app->add_option_function<double>(
      flag, [&f, key](double v) { f.number[key] = v; }, help);
}

void AddCommon(CLI::App* app, Flags& f) {
  AddText(app, f, "--out", "out", "output directory");
  AddCount(app, f, "--seed", "seed", "random seed (default $PAIRSHAP_SEED or 0)");
  AddCount(app, f, "--jobs", "jobs", "worker threads");
}

void AddData(CLI::App* app, Flags& f) {
  AddText(app, f, "--dataset", "dataset", "CSV dataset");
  AddText(app, f, "--target", "target", "response column to drop from the features");
  app->add_option("--kind", f.kinds, "feature kind override, name=continuous|binary");
}

void AddModel(CLI::App* app, Flags& f) {
  AddText(app, f, "--model", "model", "model JSON (linear or tree ensemble)");
  AddText(app, f, "--external-cmd", "external_cmd", "external predictor command");
  AddCount(app, f, "--batch-size", "batch_size", "rows per external predictor request");
  AddCount(app, f, "--timeout-ms", "timeout_ms", "external predictor reply timeout");
  app->add_flag("--raw-output,--logit", f.raw_output, "explain log-odds for logistic models");
}

void AddSolver(CLI::App* app, Flags& f) {
  AddText(app, f, "--solver", "solver", "auto|exact|kernel, JSON or file");
}

Json BuildConfig(const Flags& f) {
  Json cfg = Json::object();
  for (const auto& [k, v] : f.text) cfg[k] = v;
  for (const auto& [k, v] : f.count) cfg[k] = v;
  for (const auto& [k, v] : f.number) cfg[k] = v;
  if (f.raw_output) cfg["raw_output"] = true;
  if (!f.kinds.empty()) {
    Json kinds = Json::object();
    for (const auto& item : f.kinds) {
      const auto eq = item.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw CLI::ValidationError("--kind", "expected name=kind, got '" + item + "'");
      }
      kinds[item.substr(0, eq)] = item.substr(eq + 1);
    }
    cfg["kinds"] = kinds;
  }
  if (!cfg.contains("seed")) {
    if (const char* env = std::getenv("PAIRSHAP_SEED"); env && *env) {
      char* end = nullptr;
      const unsigned long long v = std::strtoull(env, &end, 10);
      if (*end != '\0') throw CLI::ValidationError("PAIRSHAP_SEED", "not an unsigned integer");
      cfg["seed"] = v;
    }
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pairwise Shapley explanations for tabular models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ps_version()));
  Flags flags;

  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset and its linear model");
  AddCommon(synth, flags);
  AddCount(synth, flags, "--n-rows", "n_rows", "rows to generate");
  AddCount(synth, flags, "--n-features", "n_features", "uniform features to generate");
  AddText(synth, flags, "--spec", "spec", "synthetic spec JSON or file");

  auto* pairs = app.add_subcommand("pairs", "select a reference for every target row");
  AddCommon(pairs, flags);
  AddData(pairs, flags);
  AddText(pairs, flags, "--targets", "targets", "CSV of rows to pair (default: the dataset)");
  AddText(pairs, flags, "--strategy", "strategy", "random|similar|comparable, JSON or file");
  AddCount(pairs, flags, "--limit", "limit", "pair at most this many targets");

  auto* explain = app.add_subcommand("explain", "compute attributions");
  AddCommon(explain, flags);
  AddData(explain, flags);
  AddModel(explain, flags);
  AddSolver(explain, flags);
  AddText(explain, flags, "--targets", "targets", "CSV of rows to explain (default: the dataset)");
  AddText(explain, flags, "--method", "method", "method tag, JSON or file");
  AddText(explain, flags, "--strategy", "strategy", "pairing strategy for pairwise methods");
  AddCount(explain, flags, "--top-k", "top_k", "waterfall features before folding");
  AddCount(explain, flags, "--limit", "limit", "explain at most this many rows");

  auto* diagnose = app.add_subcommand("diagnose", "compare methods on normalized attributions");
  AddCommon(diagnose, flags);
  AddData(diagnose, flags);
  AddModel(diagnose, flags);
  AddSolver(diagnose, flags);
  AddText(diagnose, flags, "--methods", "methods", "comma-separated method tokens");
  AddText(diagnose, flags, "--comparable", "comparable", "comparable strategy for method pc");
  AddText(diagnose, flags, "--signs", "signs", "expected signs, name:+,name:-");
  AddCount(diagnose, flags, "--bins", "bins", "similarity heatmap bins");
  AddCount(diagnose, flags, "--limit", "limit", "explicand rows");

  auto* perturb = app.add_subcommand("perturb", "shift one feature and compare attributions");
  AddCommon(perturb, flags);
  AddData(perturb, flags);
  AddModel(perturb, flags);
  AddSolver(perturb, flags);
  AddText(perturb, flags, "--feature", "feature", "feature to perturb");
  AddText(perturb, flags, "--deltas", "deltas", "start:stop:step grid");
  AddText(perturb, flags, "--methods", "methods", "comma-separated method tags");
  AddText(perturb, flags, "--method", "method", "single method tag, JSON or file");
  AddNumber(perturb, flags, "--valid-min", "valid_min", "skip perturbed values below this");
  AddNumber(perturb, flags, "--valid-max", "valid_max", "skip perturbed values above this");
  AddCount(perturb, flags, "--limit", "limit", "rows to perturb");

  auto* bench = app.add_subcommand("bench", "time methods on one explicand");
  AddCommon(bench, flags);
  AddData(bench, flags);
  AddModel(bench, flags);
  AddSolver(bench, flags);
  AddText(bench, flags, "--methods", "methods", "comma-separated method tags");
  AddText(bench, flags, "--strategy", "strategy", "pairing strategy for pairwise methods");
  AddCount(bench, flags, "--repeats", "repeats", "timed repetitions per method");
  AddCount(bench, flags, "--row", "row", "explicand row");

  std::string config;
  try {
    app.parse(argc, argv);
    config = BuildConfig(flags).dump();
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::Error& e) {
    return Report(PS_ERR_CONFIG, e.what());
  }

  const std::string command = app.get_subcommands().front()->get_name();
  char* summary = nullptr;
  const ps_status status = ps_run_command(command.c_str(), config.c_str(), &summary);
  if (status != PS_OK) return Report(status, ps_last_error());
  std::cout << summary << "\n";
  ps_string_free(summary);
  return 0;
}
