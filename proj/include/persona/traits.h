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

#ifndef PERSONA_TRAITS_H_
#define PERSONA_TRAITS_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace persona {

// Big Five dimensions in the fixed order E, A, C, N, O.
enum class Trait : std::uint8_t { kE = 0, kA, kC, kN, kO };

inline constexpr std::size_t kNumTraits = 5;
inline constexpr std::array<std::string_view, kNumTraits> kTraitNames = {
    "E", "A", "C", "N", "O"};

std::optional<std::size_t> trait_index(std::string_view name);

// Binary polarity per trait: 1 = high, 0 = low.
using TraitBits = std::array<std::uint8_t, kNumTraits>;

// Linear lexicon scores per trait.
using TraitScores = std::array<double, kNumTraits>;

enum class Level : std::uint8_t { kLow = 0, kMedium = 1, kHigh = 2 };

using TraitLevels = std::array<Level, kNumTraits>;

std::string_view level_name(Level level);
std::optional<Level> parse_level(std::string_view name);

// Parses "E=1,A=0,C=1,N=0,O=1": every trait exactly once, any order,
// values 0 or 1, optional spaces around tokens.
std::optional<TraitBits> parse_condition(std::string_view text);
std::string format_condition(const TraitBits& bits);

}  // namespace persona

#endif  // PERSONA_TRAITS_H_
