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

#ifndef PERSONA_GENERATOR_H_
#define PERSONA_GENERATOR_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "persona/corpus.h"
#include "persona/optim.h"
#include "persona/rng.h"
#include "persona/text.h"
#include "persona/traits.h"

namespace persona {

struct LstmConfig {
  std::size_t embed_dim = 32;
  std::size_t hidden_dim = 128;
  std::size_t cond_dim = kNumTraits;  // 5 conditional, 0 unconditional
  std::size_t vocab_size = 0;         // filled from the vocabulary
  std::size_t max_len = 40;
  std::size_t epochs = 15;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  double temperature = 1.0;
  double max_grad_norm = 5.0;
  std::size_t min_count = 2;
  std::size_t max_vocab = 20000;

  bool conditional() const { return cond_dim != 0; }
  void validate() const;
};

nlohmann::json to_json(const LstmConfig& config);
LstmConfig lstm_config_from_json(const nlohmann::json& j);

// Single-layer LSTM language model. The input at every step is the token
// embedding followed by the condition bits; gate columns are laid out as
// [i | f | g | o], each H wide.
class LstmModel {
 public:
  LstmModel() = default;

  static LstmModel init(const LstmConfig& config, Vocabulary vocab, Rng& rng);

  const LstmConfig& config() const { return config_; }
  const Vocabulary& vocab() const { return vocab_; }
  std::size_t input_dim() const { return config_.embed_dim + config_.cond_dim; }

  Parameter embedding;  // V x k
  Parameter gate_w;     // (k + cond + H) x 4H
  Parameter gate_b;     // 1 x 4H
  Parameter out_w;      // H x V
  Parameter out_b;      // 1 x V

  std::vector<Parameter*> parameters();
  std::vector<NamedParameter> named_parameters();
  void zero_grad();

  nlohmann::json to_json() const;
  static LstmModel from_json(const nlohmann::json& doc);
  void save(const std::filesystem::path& path) const;
  static LstmModel load(const std::filesystem::path& path);

 private:
  LstmConfig config_;
  Vocabulary vocab_;
};

struct LstmState {
  std::vector<double> h;
  std::vector<double> c;
};

// One cell update: z = [x; h] W + b, c' = f*c + i*g, h' = o*tanh(c').
LstmState lstm_step(std::span<const double> x, const LstmState& state,
                    const LstmModel& model);

// Logits [(T-1) x V]; row t predicts ids[t+1].
Matrix generator_forward(const EncodedText& encoded,
                         const std::optional<TraitBits>& condition,
                         const LstmModel& model);

double generator_loss(const Matrix& logits, const EncodedText& encoded);

struct GeneratorBatchItem {
  const EncodedText* encoded;
  std::optional<TraitBits> condition;
};

struct BatchLoss {
  double loss = 0.0;    // token-weighted mean cross-entropy
  double weight = 0.0;  // number of predicted tokens
};

// Teacher-forced loss over a padded batch.
BatchLoss generator_batch_loss(std::span<const GeneratorBatchItem> batch,
                               const LstmModel& model);

// Same loss, also adding d(loss)/d(params) to the model gradients.
BatchLoss generator_batch_backward(std::span<const GeneratorBatchItem> batch,
                                   LstmModel& model);

struct GeneratorTrainResult {
  LstmModel model;
  std::vector<double> epoch_losses;
};

GeneratorTrainResult train_generator(const std::vector<Document>& corpus,
                                     const LstmConfig& config, Rng& rng);

struct GenerateOptions {
  double temperature = 1.0;
  std::size_t max_len = 40;
};

struct Generation {
  Tokens tokens;
  std::string seed_word;
};

// Seeds from `seed_pool`, samples until EOS, max_len tokens, or a
// repetition (three identical tokens in a row, or a 4-gram seen earlier),
// trimming the repeated tail in the last case.
Generation generate(const LstmModel& model, const std::optional<TraitBits>& condition,
                    std::span<const std::string> seed_pool,
                    const GenerateOptions& options, Rng& rng);

inline constexpr double kGreedyTemperature = 1e-6;
inline constexpr std::size_t kRepeatRun = 3;
inline constexpr std::size_t kRepeatNgram = 4;

// Returns how many trailing tokens to drop if the sequence just violated
// the repetition rule, or 0.
std::size_t repetition_trim(std::span<const std::string> tokens);

// exp(token-weighted mean cross-entropy). Conditions come from each
// document's labels unless `fixed_condition` is given.
double perplexity(const LstmModel& model, const std::vector<Document>& corpus,
                  const std::optional<TraitBits>& fixed_condition = std::nullopt);

}  // namespace persona

#endif  // PERSONA_GENERATOR_H_
