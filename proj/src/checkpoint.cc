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

#include "persona/checkpoint.h"

#include <fstream>

#include "persona/error.h"

namespace persona {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
  return {{"shape", {m.rows(), m.cols()}}, {"data", m.data()}};
}

Matrix matrix_from_json(const json& j, const std::string& name) {
  try {
    const auto shape = j.at("shape").get<std::vector<std::size_t>>();
    if (shape.size() != 2) {
      throw Error(ErrorKind::kValidation, "parameter " + name + " shape must have 2 dims");
    }
    return Matrix(shape[0], shape[1], j.at("data").get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kValidation, "parameter " + name + ": " + e.what());
  } catch (const Error& e) {
    throw Error(ErrorKind::kValidation, "parameter " + name + ": " + e.what());
  }
}

json vocab_to_json(const Vocabulary& vocab) {
  json arr = json::array();
  for (const auto& s : vocab.stored_entries()) arr.push_back(s);
  return arr;
}

Vocabulary vocab_from_json(const json& j) {
  const auto entries = j.get<std::vector<std::string>>();
  const Vocabulary specials;
  if (entries.size() < Vocabulary::kNumSpecials) {
    throw Error(ErrorKind::kValidation, "checkpoint vocabulary lacks special tokens");
  }
  for (std::size_t i = 0; i < Vocabulary::kNumSpecials; ++i) {
    if (entries[i] != specials.stored(static_cast<TokenId>(i))) {
      throw Error(ErrorKind::kValidation, "checkpoint vocabulary specials out of order");
    }
  }
  return Vocabulary::from_stored(
      std::span<const std::string>(entries).subspan(Vocabulary::kNumSpecials));
}

void check_checkpoint_header(const json& doc, const std::string& kind) {
  if (doc.value("format_version", -1) != kCheckpointFormatVersion) {
    throw Error(ErrorKind::kValidation, "unsupported checkpoint format_version");
  }
  if (doc.value("kind", std::string()) != kind) {
    throw Error(ErrorKind::kValidation,
                "checkpoint kind is \"" + doc.value("kind", std::string()) +
                    "\", expected \"" + kind + "\"");
  }
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kParse, path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path.string());
}

void write_json_file(const std::filesystem::path& path, const json& doc) {
  write_text_file(path, doc.dump(1) + "\n");
}

}  // namespace persona
