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

#ifndef PAIRSHAP_CONFIG_HPP_
#define PAIRSHAP_CONFIG_HPP_

#include <cstdint>
#include <string>

#include "pairshap/pairing.hpp"
#include "pairshap/shapley.hpp"
#include "pairshap/valuefn.hpp"

namespace pairshap {

// Each parser accepts a JSON object, a bare tag ("ma", "similar", "exact"),
// or the path of a file holding the JSON. Seeds missing from the JSON take
// `default_seed`. Unknown keys and ill-typed values are config errors.
MethodConfig ParseMethodConfig(const std::string& text, std::uint64_t default_seed = 0);
PairStrategy ParseStrategyConfig(const std::string& text, std::uint64_t default_seed = 0);
SolverConfig ParseSolverConfig(const std::string& text, std::uint64_t default_seed = 0);

// Canonical JSON with every field spelled out.
std::string MethodConfigToJson(const MethodConfig& config);
std::string StrategyConfigToJson(const PairStrategy& strategy);
std::string SolverConfigToJson(const SolverConfig& config);

}  // namespace pairshap

#endif  // PAIRSHAP_CONFIG_HPP_
