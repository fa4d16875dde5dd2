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

#ifndef PAIRSHAP_EXPORT_HPP_
#define PAIRSHAP_EXPORT_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pairshap/pairing.hpp"
#include "pairshap/shapley.hpp"

namespace pairshap {

// %.17g, so values survive a text round trip.
std::string FormatDouble(double value);

// Quotes a CSV field when it holds a comma, quote or line break.
std::string CsvField(const std::string& text);

// {phi0, phi:{name:value}, prediction, method, target_row, reference_row,
//  dummy_features, similarity, fallback, n_evaluations, n_coalitions,
//  solver, warnings, wall_time_ms[, run_config]}. `run_config_json`, when
// non-empty, is embedded verbatim as parsed JSON.
std::string ExplanationToJson(const Explanation& e, std::span<const std::string> names,
                              const std::string& run_config_json = "");

struct WaterfallRow {
  std::string feature;
  double phi = 0.0;
  double cumulative = 0.0;  // phi0 plus every phi up to and including this row
};

// Features by |phi| descending (ties by index). With top_k > 0 the rest
// are folded into one "Other Features" row.
std::vector<WaterfallRow> Waterfall(const Explanation& e, std::span<const std::string> names,
                                    std::size_t top_k);

std::string ExplanationsCsv(std::span<const Explanation> explanations,
                            std::span<const std::string> names);
std::string WaterfallCsv(std::span<const Explanation> explanations,
                         std::span<const std::string> names, std::size_t top_k);
// target_row, reference_row, similarity, n_dummy
std::string PairsCsv(std::span<const ExplicandPair> pairs);

// Writes to a temporary file in the same directory, then renames it over
// `path`. Runtime error on failure.
void WriteFileAtomic(const std::string& path, const std::string& content);

}  // namespace pairshap

#endif  // PAIRSHAP_EXPORT_HPP_
