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

#ifndef PERSONA_CORPUS_H_
#define PERSONA_CORPUS_H_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "persona/text.h"
#include "persona/traits.h"

namespace persona {

struct Document {
  std::string text;
  Tokens tokens;
  std::optional<TraitBits> labels;
  std::optional<TraitLevels> levels;
  // Latent polarity planted by the synthetic generator, when known.
  std::optional<TraitBits> planted;
};

Document make_document(std::string text, TokenizeMode mode);

// One JSON object per line; blank lines are skipped. Throws Error(kParse)
// naming the 1-based line number of the first malformed record.
std::vector<Document> read_corpus(std::istream& in, TokenizeMode mode);
std::vector<Document> read_corpus(const std::filesystem::path& path, TokenizeMode mode);

std::string corpus_line(const Document& doc);
void write_corpus(std::ostream& out, const std::vector<Document>& docs);
void write_corpus(const std::filesystem::path& path, const std::vector<Document>& docs);

}  // namespace persona

#endif  // PERSONA_CORPUS_H_
