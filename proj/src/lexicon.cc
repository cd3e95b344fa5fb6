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

#include "persona/lexicon.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "persona/error.h"

namespace persona {

using nlohmann::json;

bool LexiconCategory::matches(std::string_view token) const {
  if (literals.contains(std::string(token))) return true;
  return std::any_of(prefixes.begin(), prefixes.end(),
                     [&](const std::string& p) { return token.starts_with(p); });
}

Lexicon::Lexicon(std::vector<LexiconCategory> categories, Matrix weights)
    : categories_(std::move(categories)), weights_(std::move(weights)) {
  if (weights_.rows() != categories_.size() || weights_.cols() != kNumTraits) {
    throw Error(ErrorKind::kValidation,
                "lexicon weights must be " + std::to_string(categories_.size()) +
                    "x5, got " + std::to_string(weights_.rows()) + "x" +
                    std::to_string(weights_.cols()));
  }
  std::set<std::string> names;
  for (const auto& cat : categories_) {
    if (!names.insert(cat.name).second) {
      throw Error(ErrorKind::kValidation, "duplicate lexicon category: " + cat.name);
    }
  }
  if (!weights_.all_finite()) {
    throw Error(ErrorKind::kValidation, "lexicon weights must be finite");
  }
}

Lexicon load_lexicon(const json& doc) {
  try {
    std::array<std::size_t, kNumTraits> column{0, 1, 2, 3, 4};
    if (auto it = doc.find("trait_order"); it != doc.end()) {
      const auto order = it->get<std::vector<std::string>>();
      std::array<bool, kNumTraits> seen{};
      if (order.size() != kNumTraits) {
        throw Error(ErrorKind::kValidation, "trait_order must list five traits");
      }
      for (std::size_t i = 0; i < kNumTraits; ++i) {
        const auto idx = trait_index(order[i]);
        if (!idx || seen[*idx]) {
          throw Error(ErrorKind::kValidation, "trait_order entry invalid: " + order[i]);
        }
        seen[*idx] = true;
        column[i] = *idx;
      }
    }

    std::vector<LexiconCategory> categories;
    for (const json& c : doc.at("categories")) {
      LexiconCategory cat;
      cat.name = c.at("name").get<std::string>();
      for (const json& e : c.at("entries")) {
        std::string entry = e.get<std::string>();
        const bool wildcard = !entry.empty() && entry.back() == '*';
        if (wildcard) entry.pop_back();
        if (entry.empty()) {
          throw Error(ErrorKind::kValidation,
                      "empty entry in lexicon category " + cat.name);
        }
        (wildcard ? cat.prefixes : cat.literals).insert(std::move(entry));
      }
      categories.push_back(std::move(cat));
    }

    const json& rows = doc.at("weights");
    if (!rows.is_array() || rows.size() != categories.size()) {
      throw Error(ErrorKind::kValidation,
                  "lexicon weights have " + std::to_string(rows.size()) +
                      " rows for " + std::to_string(categories.size()) + " categories");
    }
    Matrix weights(categories.size(), kNumTraits);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (!rows[r].is_array() || rows[r].size() != kNumTraits) {
        throw Error(ErrorKind::kValidation, "lexicon weight row " + std::to_string(r) +
                                                " (" + categories[r].name +
                                                ") must have 5 entries");
      }
      for (std::size_t i = 0; i < kNumTraits; ++i) {
        weights(r, column[i]) = rows[r][i].get<double>();
      }
    }
    return Lexicon(std::move(categories), std::move(weights));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kValidation, std::string("malformed lexicon: ") + e.what());
  }
}

Lexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open lexicon " + path.string());
  try {
    return load_lexicon(json::parse(in));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kParse, path.string() + ": " + e.what());
  }
}

json lexicon_to_json(const Lexicon& lexicon) {
  json doc;
  doc["trait_order"] = json::array();
  for (auto name : kTraitNames) doc["trait_order"].push_back(std::string(name));
  doc["categories"] = json::array();
  doc["weights"] = json::array();
  for (std::size_t c = 0; c < lexicon.num_categories(); ++c) {
    const auto& cat = lexicon.categories()[c];
    json entries = json::array();
    for (const auto& lit : cat.literals) entries.push_back(lit);
    for (const auto& p : cat.prefixes) entries.push_back(p + "*");
    doc["categories"].push_back({{"name", cat.name}, {"entries", entries}});
    auto row = lexicon.weights().row(c);
    doc["weights"].push_back(std::vector<double>(row.begin(), row.end()));
  }
  return doc;
}

std::vector<double> category_frequencies(std::span<const std::string> tokens,
                                         const Lexicon& lexicon) {
  std::vector<double> freqs(lexicon.num_categories(), 0.0);
  for (const std::string& tok : tokens) {
    for (std::size_t c = 0; c < freqs.size(); ++c) {
      if (lexicon.categories()[c].matches(tok)) freqs[c] += 1.0;
    }
  }
  const double total = std::max<double>(1.0, static_cast<double>(tokens.size()));
  for (double& f : freqs) f /= total;
  return freqs;
}

TraitScores trait_scores(std::span<const double> freqs, const Lexicon& lexicon) {
  if (freqs.size() != lexicon.num_categories()) {
    throw Error(ErrorKind::kInvalidShape, "trait_scores: frequency vector has " +
                                              std::to_string(freqs.size()) +
                                              " entries for " +
                                              std::to_string(lexicon.num_categories()) +
                                              " categories");
  }
  TraitScores scores{};
  for (std::size_t c = 0; c < freqs.size(); ++c) {
    for (std::size_t t = 0; t < kNumTraits; ++t) {
      scores[t] += freqs[c] * lexicon.weights()(c, t);
    }
  }
  return scores;
}

TraitScores score_tokens(std::span<const std::string> tokens, const Lexicon& lexicon) {
  const auto freqs = category_frequencies(tokens, lexicon);
  return trait_scores(freqs, lexicon);
}

double nearest_rank(std::vector<double> values, double p) {
  if (values.empty()) throw Error(ErrorKind::kInsufficientData, "nearest_rank: no values");
  std::sort(values.begin(), values.end());
  // The small slack keeps p*N from rounding one rank up when p = k/N is not
  // exactly representable (1/3 * 9 must give rank 3).
  const double raw = p * static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(raw - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

LevelThresholds calibrate_thresholds(std::span<const TraitScores> scores,
                                     double p_low, double p_high) {
  if (scores.size() < 3) {
    throw Error(ErrorKind::kInsufficientData,
                "threshold calibration needs at least 3 scores, got " +
                    std::to_string(scores.size()));
  }
  if (!(p_low >= 0.0 && p_low <= p_high && p_high <= 1.0)) {
    throw Error(ErrorKind::kConfiguration, "calibration percentiles must satisfy 0<=low<=high<=1");
  }
  LevelThresholds out;
  std::vector<double> column(scores.size());
  for (std::size_t t = 0; t < kNumTraits; ++t) {
    for (std::size_t i = 0; i < scores.size(); ++i) column[i] = scores[i][t];
    out.low_cut[t] = nearest_rank(column, p_low);
    out.high_cut[t] = nearest_rank(column, p_high);
  }
  return out;
}

Level assign_level(double score, double low_cut, double high_cut) {
  if (score < low_cut) return Level::kLow;
  if (score > high_cut) return Level::kHigh;
  return Level::kMedium;
}

TraitLevels assign_levels(const TraitScores& scores, const LevelThresholds& thresholds) {
  TraitLevels levels{};
  for (std::size_t t = 0; t < kNumTraits; ++t) {
    levels[t] = assign_level(scores[t], thresholds.low_cut[t], thresholds.high_cut[t]);
  }
  return levels;
}

json thresholds_to_json(const LevelThresholds& thresholds) {
  json doc = json::object();
  for (std::size_t t = 0; t < kNumTraits; ++t) {
    doc[std::string(kTraitNames[t])] = {{"low_cut", thresholds.low_cut[t]},
                                        {"high_cut", thresholds.high_cut[t]}};
  }
  return doc;
}

LevelThresholds thresholds_from_json(const json& doc) {
  LevelThresholds out;
  try {
    for (std::size_t t = 0; t < kNumTraits; ++t) {
      const json& entry = doc.at(std::string(kTraitNames[t]));
      out.low_cut[t] = entry.at("low_cut").get<double>();
      out.high_cut[t] = entry.at("high_cut").get<double>();
      if (!(out.low_cut[t] <= out.high_cut[t])) {
        throw Error(ErrorKind::kValidation, "thresholds for " +
                                                std::string(kTraitNames[t]) +
                                                " have low_cut > high_cut");
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kValidation, std::string("malformed thresholds: ") + e.what());
  }
  return out;
}

LevelThresholds load_thresholds(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open thresholds " + path.string());
  try {
    return thresholds_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kParse, path.string() + ": " + e.what());
  }
}

}  // namespace persona
