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

#include "persona/traits.h"

namespace persona {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::optional<std::size_t> trait_index(std::string_view name) {
  for (std::size_t i = 0; i < kNumTraits; ++i) {
    if (kTraitNames[i] == name) return i;
  }
  return std::nullopt;
}

std::string_view level_name(Level level) {
  switch (level) {
    case Level::kLow: return "low";
    case Level::kMedium: return "medium";
    case Level::kHigh: return "high";
  }
  return "medium";
}

std::optional<Level> parse_level(std::string_view name) {
  if (name == "low") return Level::kLow;
  if (name == "medium") return Level::kMedium;
  if (name == "high") return Level::kHigh;
  return std::nullopt;
}

std::optional<TraitBits> parse_condition(std::string_view text) {
  TraitBits bits{};
  std::array<bool, kNumTraits> seen{};
  std::size_t count = 0;
  while (true) {
    const std::size_t comma = text.find(',');
    std::string_view item = trim(text.substr(0, comma));
    const std::size_t eq = item.find('=');
    if (eq == std::string_view::npos) return std::nullopt;
    const auto idx = trait_index(trim(item.substr(0, eq)));
    const std::string_view value = trim(item.substr(eq + 1));
    if (!idx || seen[*idx] || (value != "0" && value != "1")) return std::nullopt;
    seen[*idx] = true;
    bits[*idx] = value == "1" ? 1 : 0;
    ++count;
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  if (count != kNumTraits) return std::nullopt;
  return bits;
}

std::string format_condition(const TraitBits& bits) {
  std::string out;
  for (std::size_t i = 0; i < kNumTraits; ++i) {
    if (i) out += ',';
    out += kTraitNames[i];
    out += '=';
    out += bits[i] ? '1' : '0';
  }
  return out;
}

}  // namespace persona
