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

#ifndef PERSONA_CLASSIFIER_H_
#define PERSONA_CLASSIFIER_H_

#include <array>
#include <cstddef>
#include <filesystem>
#include <vector>

#include "json.hpp"
#include "persona/corpus.h"
#include "persona/ops.h"
#include "persona/optim.h"
#include "persona/rng.h"
#include "persona/text.h"
#include "persona/traits.h"

namespace persona {

struct CnnConfig {
  std::size_t embed_dim = 32;
  std::size_t window = 3;
  std::size_t num_filters = 64;
  std::size_t vocab_size = 0;  // filled from the vocabulary
  std::size_t max_len = 48;
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  double max_grad_norm = 5.0;
  std::size_t min_count = 2;
  std::size_t max_vocab = 20000;

  void validate() const;
};

nlohmann::json to_json(const CnnConfig& config);
CnnConfig cnn_config_from_json(const nlohmann::json& j);

using TraitProbs = std::array<double, kNumTraits>;

// Embedding -> width-m convolution -> relu -> max-over-time -> five
// independent sigmoid heads.
class CnnModel {
 public:
  CnnModel() = default;

  static CnnModel init(const CnnConfig& config, Vocabulary vocab, Rng& rng);

  const CnnConfig& config() const { return config_; }
  const Vocabulary& vocab() const { return vocab_; }

  Parameter embedding;  // V x k
  Parameter conv_w;     // F x (m*k)
  Parameter conv_b;     // 1 x F
  std::array<Parameter, kNumTraits> head_w;  // F x 1 each
  std::array<Parameter, kNumTraits> head_b;  // 1 x 1 each

  std::vector<Parameter*> parameters();
  std::vector<NamedParameter> named_parameters();
  void zero_grad();

  nlohmann::json to_json() const;
  static CnnModel from_json(const nlohmann::json& doc);
  void save(const std::filesystem::path& path) const;
  static CnnModel load(const std::filesystem::path& path);

 private:
  CnnConfig config_;
  Vocabulary vocab_;
};

// Strict forward: throws Error(kShortInput) when fewer than `window` valid
// positions exist.
TraitProbs classifier_forward(const EncodedText& encoded, const CnnModel& model);

// Forward with the short-input fallback: a text shorter than the window is
// treated as a single window right-padded with PAD embeddings.
TraitProbs classify(const EncodedText& encoded, const CnnModel& model);

// Mean binary cross-entropy over the five traits, probabilities clamped to
// [1e-12, 1 - 1e-12].
double classifier_loss(const TraitProbs& probs, const TraitBits& labels);

// Adds d(loss * scale)/d(params) for one document to the model gradients
// and returns the unscaled loss.
double classifier_accumulate_grad(const EncodedText& encoded, const TraitBits& labels,
                                  CnnModel& model, double scale);

TraitBits predict_labels(const TraitProbs& probs, double threshold = 0.5);

struct ClassifierEpoch {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  std::array<double, kNumTraits> val_accuracy{};
  double mean_val_accuracy = 0.0;
};

struct ClassifierTrainResult {
  CnnModel model;
  std::vector<ClassifierEpoch> history;
  std::size_t best_epoch = 0;
  std::array<double, kNumTraits> val_accuracy{};
  std::size_t train_size = 0;
  std::size_t val_size = 0;
};

// Shuffles, splits 9:1, trains with Adam + clipping and keeps the epoch
// with the best mean validation accuracy.
ClassifierTrainResult train_classifier(const std::vector<Document>& corpus,
                                       const CnnConfig& config, Rng& rng);

std::vector<Document> label_corpus(const std::vector<Document>& docs,
                                   const CnnModel& model, std::size_t threads = 1);

// Fraction of corpus tokens that fall outside the vocabulary.
double unk_rate(const std::vector<Document>& docs, const Vocabulary& vocab);

}  // namespace persona

#endif  // PERSONA_CLASSIFIER_H_
