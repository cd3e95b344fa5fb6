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

#ifndef PERSONA_LEXICON_H_
#define PERSONA_LEXICON_H_

#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "persona/matrix.h"
#include "persona/traits.h"

namespace persona {

// A named word category. Entries ending in '*' match by prefix.
struct LexiconCategory {
  std::string name;
  std::set<std::string> literals;
  std::set<std::string> prefixes;

  bool matches(std::string_view token) const;
};

// Word categories plus a C x 5 weight matrix from category frequencies to
// trait scores (columns in E, A, C, N, O order).
class Lexicon {
 public:
  Lexicon() = default;
  Lexicon(std::vector<LexiconCategory> categories, Matrix weights);

  const std::vector<LexiconCategory>& categories() const { return categories_; }
  const Matrix& weights() const { return weights_; }
  std::size_t num_categories() const { return categories_.size(); }

 private:
  std::vector<LexiconCategory> categories_;
  Matrix weights_;
};

// Validates and builds a lexicon from its JSON document form.
Lexicon load_lexicon(const nlohmann::json& doc);
Lexicon load_lexicon(const std::filesystem::path& path);
nlohmann::json lexicon_to_json(const Lexicon& lexicon);

// freq[c] = tokens matching category c / max(1, token count).
std::vector<double> category_frequencies(std::span<const std::string> tokens,
                                         const Lexicon& lexicon);

TraitScores trait_scores(std::span<const double> freqs, const Lexicon& lexicon);

TraitScores score_tokens(std::span<const std::string> tokens, const Lexicon& lexicon);

struct LevelThresholds {
  std::array<double, kNumTraits> low_cut{};
  std::array<double, kNumTraits> high_cut{};
};

// Nearest-rank percentiles: cut = ceil(p * N)-th smallest score.
LevelThresholds calibrate_thresholds(std::span<const TraitScores> scores,
                                     double p_low = 1.0 / 3.0,
                                     double p_high = 2.0 / 3.0);

double nearest_rank(std::vector<double> values, double p);

// score < low_cut -> Low, score > high_cut -> High, otherwise Medium.
Level assign_level(double score, double low_cut, double high_cut);
TraitLevels assign_levels(const TraitScores& scores, const LevelThresholds& thresholds);

nlohmann::json thresholds_to_json(const LevelThresholds& thresholds);
LevelThresholds thresholds_from_json(const nlohmann::json& doc);
LevelThresholds load_thresholds(const std::filesystem::path& path);

}  // namespace persona

#endif  // PERSONA_LEXICON_H_
