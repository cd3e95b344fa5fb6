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

#ifndef PERSONA_TEXT_H_
#define PERSONA_TEXT_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace persona {

using TokenId = std::int32_t;
using Tokens = std::vector<std::string>;

enum class TokenizeMode { kWhitespace, kCjkChar };

// Throws Error(kInputEncoding) on malformed UTF-8.
Tokens tokenize(std::string_view raw_text, TokenizeMode mode);

// Token <-> id bijection. Ids 0..3 are PAD, UNK, BOS, EOS. Corpus tokens
// that collide with a special's surface form, or that begin with the
// escape sentinel, are stored with the sentinel prepended.
class Vocabulary {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kUnk = 1;
  static constexpr TokenId kBos = 2;
  static constexpr TokenId kEos = 3;
  static constexpr std::size_t kNumSpecials = 4;

  // U+E000, a private-use codepoint.
  static constexpr std::string_view kEscape = "\xEE\x80\x80";

  Vocabulary();

  // `stored` lists entries after the specials, already escaped.
  static Vocabulary from_stored(std::span<const std::string> stored);

  std::size_t size() const { return id_to_token_.size(); }

  // Raw token to id; unknown tokens map to kUnk.
  TokenId id_of(std::string_view token) const;
  bool contains(std::string_view token) const;

  // Raw (unescaped) token for a non-special id.
  std::string token_of(TokenId id) const;

  // Stored surface form, including specials and escapes.
  const std::string& stored(TokenId id) const { return id_to_token_.at(id); }
  std::span<const std::string> stored_entries() const { return id_to_token_; }

  static bool is_special(TokenId id) { return id >= 0 && id < 4; }
  static std::string escape(std::string_view token);
  static std::string unescape(std::string_view stored);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.id_to_token_ == b.id_to_token_;
  }

 private:
  void add_stored(std::string stored);

  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, TokenId> token_to_id_;
};

// Tokens with count >= min_count ranked by (count desc, token asc), cut to
// max_size - 4 entries.
Vocabulary build_vocab(std::span<const Tokens> corpus, std::size_t min_count,
                       std::size_t max_size);

struct EncodedText {
  std::vector<TokenId> ids;
  std::vector<std::uint8_t> mask;

  std::size_t valid_length() const;
};

// BOS + ids + EOS, truncated to max_len with EOS kept, PAD-filled.
EncodedText encode(std::span<const std::string> tokens, const Vocabulary& vocab,
                   std::size_t max_len);

// Drops PAD/BOS/EOS; throws Error(kInvalidId) for ids outside the vocab.
Tokens decode(std::span<const TokenId> ids, const Vocabulary& vocab);

std::string join_tokens(std::span<const std::string> tokens, std::string_view sep = " ");

}  // namespace persona

#endif  // PERSONA_TEXT_H_
