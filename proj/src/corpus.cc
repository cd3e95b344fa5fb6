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

#include "persona/corpus.h"

#include <fstream>
#include <istream>
#include <ostream>

#include "json.hpp"
#include "persona/error.h"

namespace persona {
namespace {

using nlohmann::json;

TraitBits parse_bits(const json& j, const char* field) {
  if (!j.is_object() || j.size() != kNumTraits) {
    throw std::invalid_argument(std::string(field) + " must map all five traits");
  }
  TraitBits bits{};
  for (std::size_t i = 0; i < kNumTraits; ++i) {
    const auto it = j.find(std::string(kTraitNames[i]));
    if (it == j.end() || !it->is_number_integer()) {
      throw std::invalid_argument(std::string(field) + " missing trait " +
                                  std::string(kTraitNames[i]));
    }
    const auto v = it->get<long long>();
    if (v != 0 && v != 1) {
      throw std::invalid_argument(std::string(field) + " values must be 0 or 1");
    }
    bits[i] = static_cast<std::uint8_t>(v);
  }
  return bits;
}

TraitLevels parse_levels(const json& j) {
  if (!j.is_object() || j.size() != kNumTraits) {
    throw std::invalid_argument("levels must map all five traits");
  }
  TraitLevels levels{};
  for (std::size_t i = 0; i < kNumTraits; ++i) {
    const auto it = j.find(std::string(kTraitNames[i]));
    if (it == j.end() || !it->is_string()) {
      throw std::invalid_argument("levels missing trait " + std::string(kTraitNames[i]));
    }
    const auto level = parse_level(it->get<std::string>());
    if (!level) throw std::invalid_argument("unknown level " + it->get<std::string>());
    levels[i] = *level;
  }
  return levels;
}

json bits_json(const TraitBits& bits) {
  json j = json::object();
  for (std::size_t i = 0; i < kNumTraits; ++i) j[std::string(kTraitNames[i])] = bits[i];
  return j;
}

}  // namespace

Document make_document(std::string text, TokenizeMode mode) {
  Document doc;
  doc.tokens = tokenize(text, mode);
  doc.text = std::move(text);
  return doc;
}

std::vector<Document> read_corpus(std::istream& in, TokenizeMode mode) {
  std::vector<Document> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      if (!j.is_object()) throw std::invalid_argument("record is not an object");
      const auto text = j.find("text");
      if (text == j.end() || !text->is_string()) {
        throw std::invalid_argument("missing string field \"text\"");
      }
      Document doc = make_document(text->get<std::string>(), mode);
      if (auto it = j.find("labels"); it != j.end() && !it->is_null()) {
        doc.labels = parse_bits(*it, "labels");
      }
      if (auto it = j.find("levels"); it != j.end() && !it->is_null()) {
        doc.levels = parse_levels(*it);
      }
      if (auto it = j.find("planted"); it != j.end() && !it->is_null()) {
        doc.planted = parse_bits(*it, "planted");
      }
      docs.push_back(std::move(doc));
    } catch (const Error& e) {
      throw Error(e.kind(), "corpus line " + std::to_string(line_no) + ": " + e.what());
    } catch (const std::exception& e) {
      throw Error(ErrorKind::kParse,
                  "corpus line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return docs;
}

std::vector<Document> read_corpus(const std::filesystem::path& path, TokenizeMode mode) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open corpus " + path.string());
  return read_corpus(in, mode);
}

std::string corpus_line(const Document& doc) {
  json j = json::object();
  j["text"] = doc.text;
  if (doc.labels) j["labels"] = bits_json(*doc.labels);
  if (doc.planted) j["planted"] = bits_json(*doc.planted);
  if (doc.levels) {
    json levels = json::object();
    for (std::size_t i = 0; i < kNumTraits; ++i) {
      levels[std::string(kTraitNames[i])] = std::string(level_name((*doc.levels)[i]));
    }
    j["levels"] = std::move(levels);
  }
  return j.dump();
}

void write_corpus(std::ostream& out, const std::vector<Document>& docs) {
  for (const Document& doc : docs) out << corpus_line(doc) << '\n';
}

void write_corpus(const std::filesystem::path& path, const std::vector<Document>& docs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write corpus " + path.string());
  write_corpus(out, docs);
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path.string());
}

}  // namespace persona
