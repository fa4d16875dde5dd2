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

#include "pairshap/export.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "json_config.hpp"
#include "pairshap/error.hpp"

namespace pairshap {

using internal::OrderedJson;

std::string FormatDouble(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string CsvField(const std::string& text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

namespace {

OrderedJson NumberOrNull(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

std::string OptionalIndex(const std::optional<std::size_t>& v) {
  return v ? std::to_string(*v) : std::string();
}

}  // namespace

std::string ExplanationToJson(const Explanation& e, std::span<const std::string> names,
                              const std::string& run_config_json) {
  if (names.size() != e.phi.size()) {
    ThrowData("explanation has " + std::to_string(e.phi.size()) + " attributions for " +
              std::to_string(names.size()) + " feature names");
  }
  OrderedJson j;
  j["phi0"] = NumberOrNull(e.phi0);
  OrderedJson phi = OrderedJson::object();
  for (std::size_t k = 0; k < names.size(); ++k) phi[names[k]] = NumberOrNull(e.phi[k]);
  j["phi"] = phi;
  j["prediction"] = NumberOrNull(e.prediction);
  j["method"] = MethodTag(e.method);
  j["target_row"] = e.target_row ? OrderedJson(*e.target_row) : OrderedJson(nullptr);
  j["reference_row"] = e.reference_row ? OrderedJson(*e.reference_row) : OrderedJson(nullptr);
  OrderedJson dummies = OrderedJson::array();
  for (std::size_t k = 0; k < e.dummy_mask.size(); ++k) {
    if (e.dummy_mask[k]) dummies.push_back(names[k]);
  }
  j["dummy_features"] = dummies;
  j["similarity"] = e.similarity ? NumberOrNull(*e.similarity) : OrderedJson(nullptr);
  j["fallback"] = e.fallback;
  j["n_evaluations"] = e.n_evaluations;
  j["n_coalitions"] = e.n_coalitions;
  j["solver"] = e.solver;
  j["warnings"] = e.warnings;
  j["wall_time_ms"] = e.wall_time_ms;
  if (!run_config_json.empty()) j["run_config"] = OrderedJson::parse(run_config_json);
  return j.dump(2) + "\n";
}

std::vector<WaterfallRow> Waterfall(const Explanation& e, std::span<const std::string> names,
                                    std::size_t top_k) {
  std::vector<std::size_t> order(e.phi.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(e.phi[a]) > std::abs(e.phi[b]);
  });
  std::vector<WaterfallRow> rows;
  double running = e.phi0;
  const std::size_t keep = top_k == 0 ? order.size() : std::min(top_k, order.size());
  for (std::size_t i = 0; i < keep; ++i) {
    running += e.phi[order[i]];
    rows.push_back({names[order[i]], e.phi[order[i]], running});
  }
  if (keep < order.size()) {
    double rest = 0.0;
    for (std::size_t i = keep; i < order.size(); ++i) rest += e.phi[order[i]];
    running += rest;
    rows.push_back({"Other Features", rest, running});
  }
  return rows;
}

std::string ExplanationsCsv(std::span<const Explanation> explanations,
                            std::span<const std::string> names) {
  std::string out = "target_row,reference_row,method,phi0,prediction";
  for (const auto& n : names) out += "," + CsvField("phi_" + n);
  out += ",n_dummy,n_evaluations,n_coalitions,solver,wall_time_ms\n";
  for (const auto& e : explanations) {
    out += OptionalIndex(e.target_row) + "," + OptionalIndex(e.reference_row) + "," +
           MethodTag(e.method) + "," + FormatDouble(e.phi0) + "," + FormatDouble(e.prediction);
    for (double p : e.phi) out += "," + FormatDouble(p);
    const auto n_dummy = std::count(e.dummy_mask.begin(), e.dummy_mask.end(), true);
    out += "," + std::to_string(n_dummy) + "," + std::to_string(e.n_evaluations) + "," +
           std::to_string(e.n_coalitions) + "," + e.solver + "," +
           FormatDouble(e.wall_time_ms) + "\n";
  }
  return out;
}

std::string WaterfallCsv(std::span<const Explanation> explanations,
                         std::span<const std::string> names, std::size_t top_k) {
  std::string out = "target_row,rank,feature,phi,cumulative\n";
  for (std::size_t i = 0; i < explanations.size(); ++i) {
    const auto& e = explanations[i];
    const std::string row = std::to_string(e.target_row.value_or(i));
    out += row + ",0,phi0," + FormatDouble(e.phi0) + "," + FormatDouble(e.phi0) + "\n";
    const auto rows = Waterfall(e, names, top_k);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      out += row + "," + std::to_string(r + 1) + "," + CsvField(rows[r].feature) + "," +
             FormatDouble(rows[r].phi) + "," + FormatDouble(rows[r].cumulative) + "\n";
    }
  }
  return out;
}

std::string PairsCsv(std::span<const ExplicandPair> pairs) {
  std::string out = "target_row,reference_row,similarity,n_dummy,fallback\n";
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    out += std::to_string(p.target_row.value_or(i)) + "," + std::to_string(p.reference_row) +
           "," + (p.similarity ? FormatDouble(*p.similarity) : std::string()) + "," +
           std::to_string(p.n_dummy()) + "," + (p.fallback ? "1" : "0") + "\n";
  }
  return out;
}

void WriteFileAtomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  std::error_code ec;
  if (target.has_parent_path()) {
    fs::create_directories(target.parent_path(), ec);
    if (ec) ThrowRuntime("cannot create directory '" + target.parent_path().string() + "': " + ec.message());
  }
  const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) ThrowRuntime("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) ThrowRuntime("write to '" + tmp.string() + "' failed");
  }
  fs::rename(tmp, target, ec);
  if (ec) {
    const std::string reason = ec.message();
    fs::remove(tmp, ec);
    ThrowRuntime("cannot rename into '" + path + "': " + reason);
  }
}

}  // namespace pairshap
