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

#ifndef PAIRSHAP_COMMANDS_HPP_
#define PAIRSHAP_COMMANDS_HPP_

#include <string>
#include <vector>

namespace pairshap {

// synth, pairs, explain, diagnose, perturb, bench.
const std::vector<std::string>& CommandNames();

// Runs one command from a JSON run config (the CLI flags, one key per flag;
// see README) and writes its artifacts under config["out"]. Returns a
// one-line JSON summary. Throws pairshap::Error.
std::string RunCommand(const std::string& command, const std::string& config_json);

}  // namespace pairshap

#endif  // PAIRSHAP_COMMANDS_HPP_
