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

#ifndef PERSONA_CHECKPOINT_H_
#define PERSONA_CHECKPOINT_H_

#include <filesystem>
#include <string>

#include "json.hpp"
#include "persona/matrix.h"
#include "persona/optim.h"
#include "persona/text.h"

namespace persona {

inline constexpr int kCheckpointFormatVersion = 1;

// {"shape": [r, c], "data": [...]}. nlohmann/json renders doubles with the
// shortest representation that round-trips, so reload is bit-exact.
nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j, const std::string& name);

nlohmann::json vocab_to_json(const Vocabulary& vocab);
Vocabulary vocab_from_json(const nlohmann::json& j);

// Checks format_version and kind; throws Error(kValidation) on mismatch.
void check_checkpoint_header(const nlohmann::json& doc, const std::string& kind);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace persona

#endif  // PERSONA_CHECKPOINT_H_
