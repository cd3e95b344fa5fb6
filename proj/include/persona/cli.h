// Copyright 2026 The Persona Authors
// SPDX-License-Identifier: Apache-2.0
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

#ifndef PERSONA_CLI_H_
#define PERSONA_CLI_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace persona {

inline constexpr const char* kToolVersion = "0.1.0";

// Exit codes returned by run_cli.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUser = 2;

// Entry point of the `persona` tool. Diagnostics go to `err` as single
// lines of the form "persona: error[<kind>]: <message>".
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// 64-bit FNV-1a of a file's bytes, as 16 lowercase hex digits.
std::string fnv1a_file(const std::filesystem::path& path);

// One token per line; surrounding whitespace and blank lines are dropped.
std::vector<std::string> read_seed_pool(const std::filesystem::path& path);

}  // namespace persona

#endif  // PERSONA_CLI_H_
