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

#ifndef PERSONA_HARNESS_H_
#define PERSONA_HARNESS_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "persona/corpus.h"
#include "persona/generator.h"
#include "persona/lexicon.h"
#include "persona/traits.h"

namespace persona {

// Planted-signal corpus description. Each token is, with probability
// `signal`, a marker of a uniformly chosen trait taken from the set that
// matches the document's latent bit; otherwise it is a neutral token drawn
// from a smoothed bigram chain over the neutral set.
struct SynthSpec {
  std::array<std::vector<std::string>, kNumTraits> high_markers;
  std::array<std::vector<std::string>, kNumTraits> low_markers;
  std::vector<std::string> neutral;
  double signal = 0.3;
  std::size_t len_min = 30;
  std::size_t len_max = 38;
  // Weight of the uniform component in each neutral transition; the rest
  // goes to `bigram_fanout` fixed successors of the previous neutral token.
  double bigram_smoothing = 0.2;
  std::size_t bigram_fanout = 12;
  std::uint64_t bigram_seed = 7;

  void validate() const;
};

// One marker per set and 340 neutral tokens. A lone marker outweighs any
// single neutral successor, so sharper decoding favours markers.
SynthSpec default_synth_spec();

nlohmann::json to_json(const SynthSpec& spec);
SynthSpec synth_spec_from_json(const nlohmann::json& j);

struct SynthCorpus {
  std::vector<Document> docs;
  Lexicon lexicon;
};

// Document i draws from Rng::stream(seed, i), so output does not depend on
// `threads`.
SynthCorpus synth_corpus(const SynthSpec& spec, std::size_t n_docs, std::uint64_t seed,
                         std::size_t threads = 1);

// One category per marker set: +1 on its trait for high markers, -1 for low.
Lexicon matched_lexicon(const SynthSpec& spec);

// Stored latent polarity; throws Error(kMissingOracle) when absent.
TraitBits oracle_label(const Document& doc);

// Independent counting check: per trait, the sign of (#high - #low)
// markers, or nullopt when neither occurs or they tie.
std::array<std::optional<std::uint8_t>, kNumTraits> counting_oracle(
    const Document& doc, const SynthSpec& spec);

// Neutral tokens, used as the evaluation seed pool.
std::vector<std::string> neutral_seed_pool(const SynthSpec& spec);

struct LevelCounts {
  std::array<std::size_t, 3> counts{};

  std::size_t total() const { return counts[0] + counts[1] + counts[2]; }
  double fraction(Level level) const;
  void add(Level level) { ++counts[static_cast<std::size_t>(level)]; }
};

struct DimensionReport {
  LevelCounts low_condition;
  LevelCounts high_condition;
  std::optional<LevelCounts> unconditional;
  // Unconditional texts matched against a random polarity per text.
  std::size_t unconditional_hits = 0;
  double accuracy = 0.0;
};

struct EvalReport {
  std::array<DimensionReport, kNumTraits> dimensions;
  double average_accuracy = 0.0;
  std::size_t n_per_condition = 0;
};

// Sampling at T = 1 spreads the tertile-calibrated level mass too evenly
// to show control; evaluation decodes sharper by default.
inline constexpr double kDefaultEvalTemperature = 0.7;

struct EvalOptions {
  std::size_t n_per_condition = 500;
  double temperature = kDefaultEvalTemperature;
  std::size_t max_len = 38;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  bool unconditional_row = true;
};

struct EvalSample {
  std::string group;  // e.g. "E:low" or "unconditional"
  std::optional<TraitBits> condition;
  Generation generation;
  TraitScores scores{};
  TraitLevels levels{};
};

// Per dimension and polarity, generates n texts with that bit fixed and the
// other bits uniform, scores them with the lexicon and tabulates levels.
// Text j of group g uses Rng::stream(seed, g * n + j); groups 0..9 are
// (trait, polarity) pairs and group 10 is the unconditional pool.
EvalReport evaluate_generation(const LstmModel& model, const LstmModel* baseline,
                               const Lexicon& lexicon, const LevelThresholds& thresholds,
                               const std::vector<std::string>& seed_pool,
                               const EvalOptions& options,
                               std::vector<EvalSample>* samples = nullptr);

struct GenerationAccuracy {
  std::array<double, kNumTraits> per_dimension{};
  double average = 0.0;
};

// accuracy_d = (#low-condition texts at Low + #high-condition at High) /
// conditional texts for d; average over dimensions.
GenerationAccuracy generation_accuracy(const EvalReport& report);

// Accuracy a random polarity would achieve against the unconditional
// level mix: (P(Low) + P(High)) / 2.
double unconditional_base_rate(const DimensionReport& dim);

nlohmann::json report_to_json(const EvalReport& report);
std::string render_table(const EvalReport& report);

}  // namespace persona

#endif  // PERSONA_HARNESS_H_
