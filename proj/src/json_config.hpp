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

#ifndef PAIRSHAP_SRC_JSON_CONFIG_HPP_
#define PAIRSHAP_SRC_JSON_CONFIG_HPP_

#include <cstdint>
#include <initializer_list>
#include <string>

#include "json.hpp"
#include "pairshap/pairing.hpp"
#include "pairshap/shapley.hpp"
#include "pairshap/valuefn.hpp"

namespace pairshap::internal {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

// Parses `text` as JSON; a config error on failure names `what`.
Json ParseJsonText(const std::string& text, const std::string& what);

// Reads a JSON-ish argument: inline object, file path, or bare tag. Bare
// tags come back as a JSON string.
Json ResolveJsonArgument(const std::string& text, const std::string& what);

void RejectUnknownKeys(const Json& obj, std::initializer_list<const char*> allowed,
                       const std::string& what);

MethodConfig MethodFromJson(const Json& value, std::uint64_t default_seed);
PairStrategy StrategyFromJson(const Json& value, std::uint64_t default_seed);
SolverConfig SolverFromJson(const Json& value, std::uint64_t default_seed);

OrderedJson MethodToJson(const MethodConfig& config);
OrderedJson StrategyToJson(const PairStrategy& strategy);
OrderedJson SolverToJson(const SolverConfig& config);

// Typed getters raising config errors that name the key.
std::uint64_t GetUint(const Json& obj, const char* key, std::uint64_t fallback,
                      const std::string& what);
double GetNumber(const Json& obj, const char* key, double fallback, const std::string& what);
bool GetBool(const Json& obj, const char* key, bool fallback, const std::string& what);
std::string GetString(const Json& obj, const char* key, const std::string& fallback,
                      const std::string& what);

}  // namespace pairshap::internal

#endif  // PAIRSHAP_SRC_JSON_CONFIG_HPP_
