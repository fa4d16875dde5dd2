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

#include "pairshap/pairshap.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "json_config.hpp"
#include "pairshap/commands.hpp"
#include "pairshap/data.hpp"
#include "pairshap/error.hpp"
#include "pairshap/export.hpp"
#include "pairshap/model.hpp"
#include "pairshap/shapley.hpp"

struct ps_dataset {
  pairshap::Dataset data;
};

struct ps_model {
  std::unique_ptr<pairshap::Predictor> predictor;
};

struct ps_explanations {
  std::vector<pairshap::Explanation> items;
  std::vector<std::string> names;
};

namespace {

thread_local std::string g_last_error;

ps_status Fail(ps_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename Fn>
ps_status Guard(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return PS_OK;
  } catch (const pairshap::Error& e) {
    return Fail(static_cast<ps_status>(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return Fail(PS_ERR_RUNTIME, "out of memory");
  } catch (const std::exception& e) {
    return Fail(PS_ERR_RUNTIME, e.what());
  } catch (...) {
    return Fail(PS_ERR_RUNTIME, "unknown error");
  }
}

char* CopyString(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void Require(bool ok, const char* what) {
  if (!ok) pairshap::ThrowConfig(std::string(what) + " must not be NULL");
}

pairshap::internal::Json ParseOptions(const char* json, const char* what) {
  if (!json || !*json) return pairshap::internal::Json::object();
  auto j = pairshap::internal::ParseJsonText(json, what);
  if (!j.is_object()) pairshap::ThrowConfig(std::string(what) + " must be a JSON object");
  return j;
}

pairshap::internal::Json Argument(const pairshap::internal::Json& options, const char* key,
                                  const char* fallback) {
  if (!options.contains(key)) return pairshap::internal::Json(fallback);
  const auto& v = options[key];
  if (v.is_string()) return pairshap::internal::ResolveJsonArgument(v.get<std::string>(), key);
  return v;
}

}  // namespace

extern "C" {

const char* ps_version(void) { return "0.1.0"; }

const char* ps_last_error(void) { return g_last_error.c_str(); }

void ps_string_free(char* s) { std::free(s); }

ps_status ps_dataset_load(const char* path, const char* options_json, ps_dataset** out) {
  return Guard([&] {
    Require(path && out, "path and out");
    const auto opts = ParseOptions(options_json, "dataset options");
    pairshap::internal::RejectUnknownKeys(opts, {"target", "kinds"}, "dataset options");
    pairshap::CsvOptions csv;
    if (opts.contains("target")) csv.target_column = opts["target"].get<std::string>();
    if (opts.contains("kinds")) {
      for (const auto& [name, kind] : opts["kinds"].items()) {
        csv.kind_overrides[name] = pairshap::ParseFeatureKind(kind.get<std::string>());
      }
    }
    *out = new ps_dataset{pairshap::LoadCsv(path, csv)};
  });
}

ps_status ps_dataset_synthesize(const char* spec_json, size_t n_rows, size_t n_features,
                                uint64_t seed, ps_dataset** out) {
  return Guard([&] {
    Require(out != nullptr, "out");
    pairshap::SyntheticSpec spec = spec_json ? pairshap::ParseSyntheticSpec(spec_json)
                                             : pairshap::SyntheticSpec::Uniform(n_features);
    if (!spec_json && n_features < 2) pairshap::ThrowConfig("synthetic data needs n_features >= 2");
    *out = new ps_dataset{pairshap::GenerateSynthetic(n_rows, spec, seed)};
  });
}

ps_status ps_dataset_write(const ps_dataset* d, const char* path) {
  return Guard([&] {
    Require(d && path, "dataset and path");
    pairshap::WriteFileAtomic(path, pairshap::FormatCsv(d->data));
  });
}

size_t ps_dataset_rows(const ps_dataset* d) { return d ? d->data.n_rows() : 0; }

size_t ps_dataset_cols(const ps_dataset* d) { return d ? d->data.n_features() : 0; }

const char* ps_dataset_feature_name(const ps_dataset* d, size_t i) {
  if (!d || i >= d->data.n_features()) return nullptr;
  return d->data.names()[i].c_str();
}

ps_status ps_dataset_row(const ps_dataset* d, size_t i, double* out) {
  return Guard([&] {
    Require(d && out, "dataset and out");
    if (i >= d->data.n_rows()) pairshap::ThrowData("row " + std::to_string(i) + " out of range");
    const auto row = d->data.row(i);
    std::copy(row.begin(), row.end(), out);
  });
}

void ps_dataset_free(ps_dataset* d) { delete d; }

ps_status ps_model_load(const char* path, const ps_dataset* expected, int raw_output,
                        ps_model** out) {
  return Guard([&] {
    Require(path && out, "path and out");
    pairshap::ModelLoadOptions opt;
    if (expected) opt.expected_features = expected->data.names();
    opt.raw_output = raw_output != 0;
    *out = new ps_model{pairshap::LoadModel(path, opt)};
  });
}

ps_status ps_model_external(const char* command, const char* options_json, ps_model** out) {
  return Guard([&] {
    Require(command && out, "command and out");
    const auto opts = ParseOptions(options_json, "external predictor options");
    pairshap::internal::RejectUnknownKeys(opts, {"batch_size", "timeout_ms"},
                                          "external predictor options");
    pairshap::ExternalPredictorOptions o;
    o.batch_size = pairshap::internal::GetUint(opts, "batch_size", o.batch_size, "options");
    o.timeout = std::chrono::milliseconds(pairshap::internal::GetUint(
        opts, "timeout_ms", static_cast<std::uint64_t>(o.timeout.count()), "options"));
    *out = new ps_model{std::make_unique<pairshap::ExternalPredictor>(command, o)};
  });
}

size_t ps_model_n_features(const ps_model* m) { return m ? m->predictor->n_features() : 0; }

ps_status ps_model_predict(const ps_model* m, const double* rows, size_t n_rows, size_t n_cols,
                           double* out) {
  return Guard([&] {
    Require(m && (rows || n_rows == 0) && (out || n_rows == 0), "model, rows and out");
    pairshap::Matrix batch(n_rows, n_cols,
                           std::vector<double>(rows, rows + n_rows * n_cols));
    const auto pred = m->predictor->Predict(batch);
    std::copy(pred.begin(), pred.end(), out);
  });
}

void ps_model_free(ps_model* m) { delete m; }

ps_status ps_explain(const ps_dataset* targets, const ps_dataset* background,
                     const ps_model* model, const char* config_json, ps_explanations** out) {
  return Guard([&] {
    Require(targets && background && model && out, "targets, background, model and out");
    const auto opts = ParseOptions(config_json, "explain config");
    pairshap::internal::RejectUnknownKeys(opts, {"method", "strategy", "solver", "seed", "jobs"},
                                          "explain config");
    const std::uint64_t seed = pairshap::internal::GetUint(opts, "seed", 0, "explain config");
    const auto method = pairshap::internal::MethodFromJson(Argument(opts, "method", "pairwise"), seed);
    const auto strategy =
        pairshap::internal::StrategyFromJson(Argument(opts, "strategy", "similar"), seed);
    const auto solver = pairshap::internal::SolverFromJson(Argument(opts, "solver", "auto"), seed);
    pairshap::BatchOptions bo;
    bo.jobs = pairshap::internal::GetUint(opts, "jobs", 1, "explain config");
    bo.targets_are_background = targets == background;
    auto result = std::make_unique<ps_explanations>();
    result->items = pairshap::ExplainBatch(targets->data, background->data, *model->predictor,
                                           strategy, method, solver, bo);
    result->names = background->data.names();
    *out = result.release();
  });
}

size_t ps_explanations_count(const ps_explanations* e) { return e ? e->items.size() : 0; }

size_t ps_explanations_n_features(const ps_explanations* e) { return e ? e->names.size() : 0; }

ps_status ps_explanation_values(const ps_explanations* e, size_t i, double* phi0, double* phi,
                                double* prediction) {
  return Guard([&] {
    Require(e != nullptr, "explanations");
    if (i >= e->items.size()) pairshap::ThrowData("explanation index out of range");
    const auto& x = e->items[i];
    if (phi0) *phi0 = x.phi0;
    if (phi) std::copy(x.phi.begin(), x.phi.end(), phi);
    if (prediction) *prediction = x.prediction;
  });
}

ps_status ps_explanation_json(const ps_explanations* e, size_t i, char** out) {
  return Guard([&] {
    Require(e && out, "explanations and out");
    if (i >= e->items.size()) pairshap::ThrowData("explanation index out of range");
    *out = CopyString(pairshap::ExplanationToJson(e->items[i], e->names));
  });
}

void ps_explanations_free(ps_explanations* e) { delete e; }

ps_status ps_run_command(const char* command, const char* config_json, char** summary_out) {
  return Guard([&] {
    Require(command != nullptr, "command");
    const std::string summary = pairshap::RunCommand(command, config_json ? config_json : "{}");
    if (summary_out) *summary_out = CopyString(summary);
  });
}

}  // extern "C"
