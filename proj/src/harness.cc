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

#include "persona/harness.h"

#include <cstdio>
#include <set>
#include <sstream>

#include "persona/error.h"
#include "persona/parallel.h"

namespace persona {

using nlohmann::json;

namespace {

std::string marker_name(std::size_t trait, bool high, std::size_t i) {
  return std::string(kTraitNames[trait]) + (high ? "_hi" : "_lo") + std::to_string(i);
}

// Successor lists for the neutral bigram chain. Depends only on the
// SynthSpec, never on the corpus seed.
std::vector<std::vector<std::size_t>> bigram_table(const SynthSpec& spec) {
  Rng rng(spec.bigram_seed);
  std::vector<std::vector<std::size_t>> table(spec.neutral.size());
  for (auto& successors : table) {
    successors.resize(spec.bigram_fanout);
    for (auto& s : successors) s = rng.uniform_int(spec.neutral.size());
  }
  return table;
}

Document synth_document(const SynthSpec& spec,
                        const std::vector<std::vector<std::size_t>>& bigrams, Rng& rng) {
  TraitBits latent{};
  for (auto& bit : latent) bit = static_cast<std::uint8_t>(rng.uniform_int(2));
  const std::size_t length = spec.len_min + rng.uniform_int(spec.len_max - spec.len_min + 1);

  Document doc;
  doc.tokens.reserve(length);
  std::optional<std::size_t> prev_neutral;
  for (std::size_t i = 0; i < length; ++i) {
    if (rng.uniform() < spec.signal) {
      const std::size_t d = rng.uniform_int(kNumTraits);
      const auto& set = latent[d] ? spec.high_markers[d] : spec.low_markers[d];
      doc.tokens.push_back(set[rng.uniform_int(set.size())]);
      continue;
    }
    std::size_t next;
    if (prev_neutral && rng.uniform() >= spec.bigram_smoothing) {
      const auto& successors = bigrams[*prev_neutral];
      next = successors[rng.uniform_int(successors.size())];
    } else {
      next = rng.uniform_int(spec.neutral.size());
    }
    doc.tokens.push_back(spec.neutral[next]);
    prev_neutral = next;
  }
  doc.text = join_tokens(doc.tokens);
  doc.labels = latent;
  doc.planted = latent;
  return doc;
}

}  // namespace

void SynthSpec::validate() const {
  std::set<std::string> seen;
  auto check_set = [&](const std::vector<std::string>& set, const std::string& what) {
    if (set.empty()) throw Error(ErrorKind::kValidation, "synth spec: " + what + " is empty");
    for (const auto& tok : set) {
      if (tok.empty() || tok.find_first_of(" \t\r\n") != std::string::npos) {
        throw Error(ErrorKind::kValidation,
                    "synth spec: token \"" + tok + "\" in " + what +
                        " must be non-empty without whitespace");
      }
      if (!seen.insert(tok).second) {
        throw Error(ErrorKind::kValidation,
                    "synth spec: token \"" + tok + "\" appears in more than one set");
      }
    }
  };
  for (std::size_t d = 0; d < kNumTraits; ++d) {
    check_set(high_markers[d], std::string(kTraitNames[d]) + " high markers");
    check_set(low_markers[d], std::string(kTraitNames[d]) + " low markers");
  }
  check_set(neutral, "neutral set");
  if (!(signal > 0.0 && signal <= 1.0)) {
    throw Error(ErrorKind::kValidation, "synth spec: signal must lie in (0, 1]");
  }
  if (len_min < 4 || len_max < len_min) {
    throw Error(ErrorKind::kValidation, "synth spec: need 4 <= len_min <= len_max");
  }
  if (!(bigram_smoothing >= 0.0 && bigram_smoothing <= 1.0) || bigram_fanout < 1) {
    throw Error(ErrorKind::kValidation,
                "synth spec: bigram_smoothing must lie in [0, 1] and bigram_fanout >= 1");
  }
}

SynthSpec default_synth_spec() {
  SynthSpec spec;
  for (std::size_t d = 0; d < kNumTraits; ++d) {
    spec.high_markers[d].push_back(marker_name(d, true, 0));
    spec.low_markers[d].push_back(marker_name(d, false, 0));
  }
  for (std::size_t i = 0; i < 340; ++i) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "w%03zu", i);
    spec.neutral.emplace_back(buf);
  }
  return spec;
}

json to_json(const SynthSpec& spec) {
  json high = json::object();
  json low = json::object();
  for (std::size_t d = 0; d < kNumTraits; ++d) {
    high[std::string(kTraitNames[d])] = spec.high_markers[d];
    low[std::string(kTraitNames[d])] = spec.low_markers[d];
  }
  return {{"high_markers", high},
          {"low_markers", low},
          {"neutral", spec.neutral},
          {"signal", spec.signal},
          {"len_min", spec.len_min},
          {"len_max", spec.len_max},
          {"bigram_smoothing", spec.bigram_smoothing},
          {"bigram_fanout", spec.bigram_fanout},
          {"bigram_seed", spec.bigram_seed}};
}

SynthSpec synth_spec_from_json(const json& j) {
  SynthSpec spec;
  try {
    for (std::size_t d = 0; d < kNumTraits; ++d) {
      const std::string name(kTraitNames[d]);
      spec.high_markers[d] = j.at("high_markers").at(name).get<std::vector<std::string>>();
      spec.low_markers[d] = j.at("low_markers").at(name).get<std::vector<std::string>>();
    }
    spec.neutral = j.at("neutral").get<std::vector<std::string>>();
    spec.signal = j.value("signal", spec.signal);
    spec.len_min = j.value("len_min", spec.len_min);
    spec.len_max = j.value("len_max", spec.len_max);
    spec.bigram_smoothing = j.value("bigram_smoothing", spec.bigram_smoothing);
    spec.bigram_fanout = j.value("bigram_fanout", spec.bigram_fanout);
    spec.bigram_seed = j.value("bigram_seed", spec.bigram_seed);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kValidation, std::string("malformed synth spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

Lexicon matched_lexicon(const SynthSpec& spec) {
  std::vector<LexiconCategory> categories;
  Matrix weights(2 * kNumTraits, kNumTraits);
  for (std::size_t d = 0; d < kNumTraits; ++d) {
    for (bool high : {true, false}) {
      LexiconCategory cat;
      cat.name = std::string(kTraitNames[d]) + (high ? "_high" : "_low");
      const auto& set = high ? spec.high_markers[d] : spec.low_markers[d];
      cat.literals.insert(set.begin(), set.end());
      weights(categories.size(), d) = high ? 1.0 : -1.0;
      categories.push_back(std::move(cat));
    }
  }
  return Lexicon(std::move(categories), std::move(weights));
}

SynthCorpus synth_corpus(const SynthSpec& spec, std::size_t n_docs, std::uint64_t seed,
                         std::size_t threads) {
  spec.validate();
  const auto bigrams = bigram_table(spec);
  SynthCorpus out;
  out.docs.resize(n_docs);
  parallel_for(n_docs, threads, [&](std::size_t i) {
    Rng rng = Rng::stream(seed, i);
    out.docs[i] = synth_document(spec, bigrams, rng);
  });
  out.lexicon = matched_lexicon(spec);
  return out;
}

TraitBits oracle_label(const Document& doc) {
  if (!doc.planted) {
    throw Error(ErrorKind::kMissingOracle, "document carries no planted polarity");
  }
  return *doc.planted;
}

std::array<std::optional<std::uint8_t>, kNumTraits> counting_oracle(
    const Document& doc, const SynthSpec& spec) {
  std::array<std::optional<std::uint8_t>, kNumTraits> out;
  for (std::size_t d = 0; d < kNumTraits; ++d) {
    const std::set<std::string> high(spec.high_markers[d].begin(), spec.high_markers[d].end());
    const std::set<std::string> low(spec.low_markers[d].begin(), spec.low_markers[d].end());
    long balance = 0;
    for (const auto& tok : doc.tokens) {
      if (high.contains(tok)) ++balance;
      if (low.contains(tok)) --balance;
    }
    if (balance != 0) out[d] = balance > 0 ? 1 : 0;
  }
  return out;
}

std::vector<std::string> neutral_seed_pool(const SynthSpec& spec) { return spec.neutral; }

double LevelCounts::fraction(Level level) const {
  const std::size_t n = total();
  return n == 0 ? 0.0
                : static_cast<double>(counts[static_cast<std::size_t>(level)]) /
                      static_cast<double>(n);
}

EvalReport evaluate_generation(const LstmModel& model, const LstmModel* baseline,
                               const Lexicon& lexicon, const LevelThresholds& thresholds,
                               const std::vector<std::string>& seed_pool,
                               const EvalOptions& options, std::vector<EvalSample>* samples) {
  if (!model.config().conditional()) {
    throw Error(ErrorKind::kConfiguration, "evaluation needs a conditional generator");
  }
  if (options.unconditional_row && baseline == nullptr) {
    throw Error(ErrorKind::kConfiguration,
                "unconditional row requested but no baseline model supplied");
  }
  if (baseline != nullptr && baseline->config().conditional()) {
    throw Error(ErrorKind::kConfiguration, "baseline model must be unconditional");
  }
  const std::size_t n = options.n_per_condition;
  if (n == 0) throw Error(ErrorKind::kInsufficientData, "n_per_condition must be positive");

  const std::size_t groups = 2 * kNumTraits + (options.unconditional_row ? 1 : 0);
  std::vector<EvalSample> results(groups * n);
  const GenerateOptions gen_options{options.temperature, options.max_len};
  parallel_for(results.size(), options.threads, [&](std::size_t task) {
    const std::size_t group = task / n;
    Rng rng = Rng::stream(options.seed, task);
    EvalSample& s = results[task];
    // Every text draws five polarity bits first: for conditional groups
    // one is then overwritten; for the unconditional pool they are the
    // reference polarity used by the base-rate check.
    TraitBits bits{};
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng.uniform_int(2));
    if (group < 2 * kNumTraits) {
      const std::size_t d = group / 2;
      bits[d] = static_cast<std::uint8_t>(group % 2);
      s.group = std::string(kTraitNames[d]) + (group % 2 ? ":high" : ":low");
      s.condition = bits;
      s.generation = generate(model, bits, seed_pool, gen_options, rng);
    } else {
      s.group = "unconditional";
      s.condition = bits;
      s.generation = generate(*baseline, std::nullopt, seed_pool, gen_options, rng);
    }
    s.scores = score_tokens(s.generation.tokens, lexicon);
    s.levels = assign_levels(s.scores, thresholds);
  });

  EvalReport report;
  report.n_per_condition = n;
  for (std::size_t task = 0; task < results.size(); ++task) {
    const std::size_t group = task / n;
    const EvalSample& s = results[task];
    if (group < 2 * kNumTraits) {
      const std::size_t d = group / 2;
      auto& counts = group % 2 ? report.dimensions[d].high_condition
                               : report.dimensions[d].low_condition;
      counts.add(s.levels[d]);
    } else {
      for (std::size_t d = 0; d < kNumTraits; ++d) {
        auto& dim = report.dimensions[d];
        if (!dim.unconditional) dim.unconditional = LevelCounts{};
        dim.unconditional->add(s.levels[d]);
        const Level wanted = (*s.condition)[d] ? Level::kHigh : Level::kLow;
        if (s.levels[d] == wanted) ++dim.unconditional_hits;
      }
    }
  }
  const GenerationAccuracy acc = generation_accuracy(report);
  for (std::size_t d = 0; d < kNumTraits; ++d) report.dimensions[d].accuracy = acc.per_dimension[d];
  report.average_accuracy = acc.average;
  if (samples != nullptr) *samples = std::move(results);
  return report;
}

GenerationAccuracy generation_accuracy(const EvalReport& report) {
  GenerationAccuracy out;
  double sum = 0.0;
  for (std::size_t d = 0; d < kNumTraits; ++d) {
    const auto& dim = report.dimensions[d];
    const std::size_t total = dim.low_condition.total() + dim.high_condition.total();
    if (total == 0) {
      throw Error(ErrorKind::kInsufficientData,
                  "report has no conditional texts for " + std::string(kTraitNames[d]));
    }
    const std::size_t hits = dim.low_condition.counts[static_cast<std::size_t>(Level::kLow)] +
                             dim.high_condition.counts[static_cast<std::size_t>(Level::kHigh)];
    out.per_dimension[d] = static_cast<double>(hits) / static_cast<double>(total);
    sum += out.per_dimension[d];
  }
  out.average = sum / static_cast<double>(kNumTraits);
  return out;
}

double unconditional_base_rate(const DimensionReport& dim) {
  if (!dim.unconditional || dim.unconditional->total() == 0) {
    throw Error(ErrorKind::kInsufficientData, "report has no unconditional row");
  }
  return 0.5 * (dim.unconditional->fraction(Level::kLow) +
                dim.unconditional->fraction(Level::kHigh));
}

json report_to_json(const EvalReport& report) {
  auto dist = [](const LevelCounts& c) {
    return json{{"low", c.fraction(Level::kLow)},
                {"medium", c.fraction(Level::kMedium)},
                {"high", c.fraction(Level::kHigh)},
                {"count", c.total()}};
  };
  json dims = json::object();
  for (std::size_t d = 0; d < kNumTraits; ++d) {
    const auto& dim = report.dimensions[d];
    json entry = {{"low_condition", dist(dim.low_condition)},
                  {"high_condition", dist(dim.high_condition)},
                  {"accuracy", dim.accuracy}};
    if (dim.unconditional) {
      entry["unconditional"] = dist(*dim.unconditional);
      entry["unconditional_accuracy"] =
          static_cast<double>(dim.unconditional_hits) /
          static_cast<double>(dim.unconditional->total());
      entry["unconditional_base_rate"] = unconditional_base_rate(dim);
    }
    dims[std::string(kTraitNames[d])] = std::move(entry);
  }
  return {{"dimensions", std::move(dims)},
          {"average_accuracy", report.average_accuracy},
          {"n_per_condition", report.n_per_condition}};
}

std::string render_table(const EvalReport& report) {
  static constexpr const char* kLongNames[] = {"Extraversion", "Agreeableness",
                                               "Conscientiousness", "Neuroticism",
                                               "Openness"};
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-18s %-14s %9s %9s %9s %9s\n", "Dimension", "Condition",
                "Low", "Medium", "High", "Accuracy");
  out << line;
  auto row = [&](const char* dim, const char* cond, const LevelCounts& c, const char* acc) {
    std::snprintf(line, sizeof(line), "%-18s %-14s %8.2f%% %8.2f%% %8.2f%% %9s\n", dim, cond,
                  100.0 * c.fraction(Level::kLow), 100.0 * c.fraction(Level::kMedium),
                  100.0 * c.fraction(Level::kHigh), acc);
    out << line;
  };
  for (std::size_t d = 0; d < kNumTraits; ++d) {
    const auto& dim = report.dimensions[d];
    char acc[32];
    std::snprintf(acc, sizeof(acc), "%.2f%%", 100.0 * dim.accuracy);
    row(kLongNames[d], "Low condition", dim.low_condition, acc);
    row("", "High condition", dim.high_condition, "");
    if (dim.unconditional) row("", "Unconditional", *dim.unconditional, "");
  }
  std::snprintf(line, sizeof(line), "Average generation accuracy: %.2f%% (n = %zu per condition)\n",
                100.0 * report.average_accuracy, report.n_per_condition);
  out << line;
  return out.str();
}

}  // namespace persona
