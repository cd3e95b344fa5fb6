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

#include "persona/text.h"

#include <algorithm>
#include <map>
#include <utility>

#include "persona/error.h"

namespace persona {
namespace {

constexpr std::string_view kSpecialForms[] = {"<pad>", "<unk>", "<bos>", "<eos>"};

struct Codepoint {
  char32_t value;
  std::size_t length;
};

Codepoint decode_utf8(std::string_view s, std::size_t pos) {
  auto fail = [pos]() -> Codepoint {
    throw Error(ErrorKind::kInputEncoding,
                "invalid UTF-8 at byte offset " + std::to_string(pos));
  };
  const auto b0 = static_cast<unsigned char>(s[pos]);
  std::size_t len;
  char32_t cp;
  if (b0 < 0x80) return {b0, 1};
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    return fail();
  }
  if (pos + len > s.size()) return fail();
  for (std::size_t i = 1; i < len; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) return fail();
    cp = (cp << 6) | (b & 0x3F);
  }
  // Overlong forms, surrogates and out-of-range values.
  static constexpr char32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
  if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    return fail();
  }
  return {cp, len};
}

bool is_unicode_space(char32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

bool is_cjk(char32_t cp) {
  return (cp >= 0x4E00 && cp <= 0x9FFF) ||    // unified ideographs
         (cp >= 0x3400 && cp <= 0x4DBF) ||    // extension A
         (cp >= 0x20000 && cp <= 0x2EBEF) ||  // extensions B-F
         (cp >= 0x30000 && cp <= 0x323AF) ||  // extensions G-H
         (cp >= 0xF900 && cp <= 0xFAFF) ||    // compatibility ideographs
         (cp >= 0x3001 && cp <= 0x303F) ||    // CJK punctuation
         (cp >= 0xFF01 && cp <= 0xFF60);      // fullwidth forms
}

}  // namespace

Tokens tokenize(std::string_view raw_text, TokenizeMode mode) {
  Tokens tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  std::size_t pos = 0;
  while (pos < raw_text.size()) {
    const Codepoint cp = decode_utf8(raw_text, pos);
    const std::string_view bytes = raw_text.substr(pos, cp.length);
    pos += cp.length;
    if (is_unicode_space(cp.value)) {
      flush();
    } else if (mode == TokenizeMode::kCjkChar && is_cjk(cp.value)) {
      flush();
      tokens.emplace_back(bytes);
    } else {
      current.append(bytes);
    }
  }
  flush();
  return tokens;
}

Vocabulary::Vocabulary() {
  for (std::string_view s : kSpecialForms) add_stored(std::string(s));
}

Vocabulary Vocabulary::from_stored(std::span<const std::string> stored) {
  Vocabulary vocab;
  for (const std::string& s : stored) {
    if (vocab.token_to_id_.contains(s)) {
      throw Error(ErrorKind::kValidation, "duplicate vocabulary entry: " + s);
    }
    vocab.add_stored(s);
  }
  return vocab;
}

void Vocabulary::add_stored(std::string stored) {
  const auto id = static_cast<TokenId>(id_to_token_.size());
  token_to_id_.emplace(stored, id);
  id_to_token_.push_back(std::move(stored));
}

std::string Vocabulary::escape(std::string_view token) {
  const bool collides =
      std::find(std::begin(kSpecialForms), std::end(kSpecialForms), token) !=
          std::end(kSpecialForms) ||
      token.starts_with(kEscape);
  return collides ? std::string(kEscape) + std::string(token) : std::string(token);
}

std::string Vocabulary::unescape(std::string_view stored) {
  if (stored.starts_with(kEscape)) stored.remove_prefix(kEscape.size());
  return std::string(stored);
}

TokenId Vocabulary::id_of(std::string_view token) const {
  auto it = token_to_id_.find(escape(token));
  return it == token_to_id_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return token_to_id_.contains(escape(token));
}

std::string Vocabulary::token_of(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size()) {
    throw Error(ErrorKind::kInvalidId, "token id " + std::to_string(id) +
                                           " outside vocabulary of size " +
                                           std::to_string(id_to_token_.size()));
  }
  if (is_special(id)) return id_to_token_[id];
  return unescape(id_to_token_[id]);
}

Vocabulary build_vocab(std::span<const Tokens> corpus, std::size_t min_count,
                       std::size_t max_size) {
  if (max_size < Vocabulary::kNumSpecials) {
    throw Error(ErrorKind::kConfiguration, "vocabulary max_size must be at least 4");
  }
  std::map<std::string, std::size_t> counts;
  for (const Tokens& doc : corpus) {
    for (const std::string& tok : doc) ++counts[Vocabulary::escape(tok)];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (auto& [tok, n] : counts) {
    if (n >= min_count) ranked.emplace_back(tok, n);
  }
  // The map is already sorted by token, so a stable sort on count keeps the
  // lexicographic tie-break.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  const std::size_t keep =
      std::min(ranked.size(), max_size - Vocabulary::kNumSpecials);
  std::vector<std::string> stored;
  stored.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) stored.push_back(std::move(ranked[i].first));
  return Vocabulary::from_stored(stored);
}

std::size_t EncodedText::valid_length() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1));
}

EncodedText encode(std::span<const std::string> tokens, const Vocabulary& vocab,
                   std::size_t max_len) {
  if (max_len < 2) {
    throw Error(ErrorKind::kConfiguration, "encode: max_len must be at least 2");
  }
  EncodedText out;
  out.ids.assign(max_len, Vocabulary::kPad);
  out.mask.assign(max_len, 0);
  const std::size_t body = std::min(tokens.size(), max_len - 2);
  out.ids[0] = Vocabulary::kBos;
  for (std::size_t i = 0; i < body; ++i) out.ids[i + 1] = vocab.id_of(tokens[i]);
  out.ids[body + 1] = Vocabulary::kEos;
  std::fill(out.mask.begin(), out.mask.begin() + static_cast<std::ptrdiff_t>(body + 2), 1);
  return out;
}

Tokens decode(std::span<const TokenId> ids, const Vocabulary& vocab) {
  Tokens out;
  for (TokenId id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab.size()) {
      throw Error(ErrorKind::kInvalidId, "decode: id " + std::to_string(id) +
                                             " outside vocabulary");
    }
    if (id == Vocabulary::kPad || id == Vocabulary::kBos || id == Vocabulary::kEos) {
      continue;
    }
    out.push_back(vocab.token_of(id));
  }
  return out;
}

std::string join_tokens(std::span<const std::string> tokens, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

}  // namespace persona
