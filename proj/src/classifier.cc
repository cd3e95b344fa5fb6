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

#include "persona/classifier.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "persona/checkpoint.h"
#include "persona/error.h"
#include "persona/parallel.h"

namespace persona {

using nlohmann::json;

namespace {

constexpr double kProbClamp = 1e-12;

struct CnnTrace {
  std::vector<TokenId> window_ids;  // P * m ids, window-major
  Matrix windows;                   // P x (m*k)
  Matrix pre;                       // P x F
  Matrix act;                       // P x F
  Pooled pooled;
  TraitProbs probs{};
};

std::string head_name(const char* prefix, std::size_t trait) {
  return std::string(prefix) + "." + std::string(kTraitNames[trait]);
}

TraitProbs forward_impl(const EncodedText& encoded, const CnnModel& model,
                        bool allow_short, CnnTrace& trace) {
  const CnnConfig& cfg = model.config();
  const std::size_t m = cfg.window;
  const std::size_t k = cfg.embed_dim;
  const std::size_t len = encoded.ids.size();
  if (encoded.mask.size() != len) {
    throw Error(ErrorKind::kInvalidShape, "encoded ids and mask lengths differ");
  }

  trace.window_ids.clear();
  std::size_t windows = 0;
  for (std::size_t p = 0; p + m <= len; ++p) {
    bool valid = true;
    for (std::size_t j = 0; j < m && valid; ++j) valid = encoded.mask[p + j] == 1;
    if (!valid) continue;
    for (std::size_t j = 0; j < m; ++j) trace.window_ids.push_back(encoded.ids[p + j]);
    ++windows;
  }
  if (windows == 0) {
    if (!allow_short) {
      throw Error(ErrorKind::kShortInput,
                  "classifier input has fewer than " + std::to_string(m) +
                      " consecutive valid positions");
    }
    for (std::size_t p = 0; p < len && trace.window_ids.size() < m; ++p) {
      if (encoded.mask[p]) trace.window_ids.push_back(encoded.ids[p]);
    }
    trace.window_ids.resize(m, Vocabulary::kPad);
    windows = 1;
  }

  const std::size_t vocab_size = model.embedding.value.rows();
  trace.windows = Matrix(windows, m * k);
  for (std::size_t p = 0; p < windows; ++p) {
    auto dst = trace.windows.row(p);
    for (std::size_t j = 0; j < m; ++j) {
      const TokenId id = trace.window_ids[p * m + j];
      if (id < 0 || static_cast<std::size_t>(id) >= vocab_size) {
        throw Error(ErrorKind::kInvalidId, "token id " + std::to_string(id) +
                                               " outside classifier vocabulary");
      }
      auto emb = model.embedding.value.row(static_cast<std::size_t>(id));
      std::copy(emb.begin(), emb.end(), dst.begin() + static_cast<std::ptrdiff_t>(j * k));
    }
  }

  trace.pre = affine(trace.windows, model.conv_w.value.transposed(), model.conv_b.value);
  trace.act = activate(Activation::kRelu, trace.pre);
  trace.pooled = max_over_time(trace.act);

  for (std::size_t d = 0; d < kNumTraits; ++d) {
    const Matrix logit = matmul(trace.pooled.values, model.head_w[d].value);
    trace.probs[d] = sigmoid(logit(0, 0) + model.head_b[d].value(0, 0));
  }
  return trace.probs;
}

}  // namespace

void CnnConfig::validate() const {
  if (window < 1 || embed_dim < 1 || num_filters < 1) {
    throw Error(ErrorKind::kConfiguration, "cnn: window, embed_dim, num_filters must be >= 1");
  }
  if (max_len < window + 2) {
    throw Error(ErrorKind::kConfiguration, "cnn: max_len must be at least window + 2");
  }
  if (batch_size < 1) throw Error(ErrorKind::kConfiguration, "cnn: batch_size must be >= 1");
  if (!(learning_rate > 0.0)) {
    throw Error(ErrorKind::kConfiguration, "cnn: learning_rate must be positive");
  }
}

json to_json(const CnnConfig& c) {
  return {{"embed_dim", c.embed_dim},     {"window", c.window},
          {"num_filters", c.num_filters}, {"vocab_size", c.vocab_size},
          {"max_len", c.max_len},         {"epochs", c.epochs},
          {"batch_size", c.batch_size},   {"learning_rate", c.learning_rate},
          {"max_grad_norm", c.max_grad_norm}, {"min_count", c.min_count},
          {"max_vocab", c.max_vocab}};
}

CnnConfig cnn_config_from_json(const json& j) {
  CnnConfig c;
  c.embed_dim = j.value("embed_dim", c.embed_dim);
  c.window = j.value("window", c.window);
  c.num_filters = j.value("num_filters", c.num_filters);
  c.vocab_size = j.value("vocab_size", c.vocab_size);
  c.max_len = j.value("max_len", c.max_len);
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.max_grad_norm = j.value("max_grad_norm", c.max_grad_norm);
  c.min_count = j.value("min_count", c.min_count);
  c.max_vocab = j.value("max_vocab", c.max_vocab);
  return c;
}

CnnModel CnnModel::init(const CnnConfig& config, Vocabulary vocab, Rng& rng) {
  config.validate();
  CnnModel model;
  model.config_ = config;
  model.config_.vocab_size = vocab.size();
  model.vocab_ = std::move(vocab);
  const std::size_t v = model.config_.vocab_size;
  const std::size_t k = config.embed_dim;
  const std::size_t f = config.num_filters;
  model.embedding = Parameter(xavier_init(v, k, rng));
  model.conv_w = Parameter(xavier_init(f, config.window * k, rng));
  model.conv_b = Parameter(Matrix(1, f));
  for (std::size_t d = 0; d < kNumTraits; ++d) {
    model.head_w[d] = Parameter(xavier_init(f, 1, rng));
    model.head_b[d] = Parameter(Matrix(1, 1));
  }
  return model;
}

std::vector<Parameter*> CnnModel::parameters() {
  std::vector<Parameter*> out = {&embedding, &conv_w, &conv_b};
  for (std::size_t d = 0; d < kNumTraits; ++d) {
    out.push_back(&head_w[d]);
    out.push_back(&head_b[d]);
  }
  return out;
}

std::vector<NamedParameter> CnnModel::named_parameters() {
  std::vector<NamedParameter> out = {
      {"embedding", &embedding}, {"conv_w", &conv_w}, {"conv_b", &conv_b}};
  for (std::size_t d = 0; d < kNumTraits; ++d) {
    out.push_back({head_name("head_w", d), &head_w[d]});
    out.push_back({head_name("head_b", d), &head_b[d]});
  }
  return out;
}

void CnnModel::zero_grad() {
  for (Parameter* p : parameters()) p->zero_grad();
}

json CnnModel::to_json() const {
  json params = json::object();
  params["embedding"] = matrix_to_json(embedding.value);
  params["conv_w"] = matrix_to_json(conv_w.value);
  params["conv_b"] = matrix_to_json(conv_b.value);
  for (std::size_t d = 0; d < kNumTraits; ++d) {
    params[head_name("head_w", d)] = matrix_to_json(head_w[d].value);
    params[head_name("head_b", d)] = matrix_to_json(head_b[d].value);
  }
  return {{"format_version", kCheckpointFormatVersion},
          {"kind", "cnn"},
          {"config", persona::to_json(config_)},
          {"vocab", vocab_to_json(vocab_)},
          {"params", std::move(params)}};
}

CnnModel CnnModel::from_json(const json& doc) {
  check_checkpoint_header(doc, "cnn");
  CnnModel model;
  try {
    model.config_ = cnn_config_from_json(doc.at("config"));
    model.config_.validate();
    model.vocab_ = vocab_from_json(doc.at("vocab"));
    const json& params = doc.at("params");
    auto load = [&](const std::string& name, std::size_t rows, std::size_t cols) {
      Matrix m = matrix_from_json(params.at(name), name);
      if (m.rows() != rows || m.cols() != cols) {
        throw Error(ErrorKind::kValidation, "parameter " + name + " has wrong shape");
      }
      return Parameter(std::move(m));
    };
    const auto& c = model.config_;
    if (c.vocab_size != model.vocab_.size()) {
      throw Error(ErrorKind::kValidation, "checkpoint vocab_size disagrees with vocab");
    }
    model.embedding = load("embedding", c.vocab_size, c.embed_dim);
    model.conv_w = load("conv_w", c.num_filters, c.window * c.embed_dim);
    model.conv_b = load("conv_b", 1, c.num_filters);
    for (std::size_t d = 0; d < kNumTraits; ++d) {
      model.head_w[d] = load(head_name("head_w", d), c.num_filters, 1);
      model.head_b[d] = load(head_name("head_b", d), 1, 1);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kValidation, std::string("malformed cnn checkpoint: ") + e.what());
  }
  return model;
}

void CnnModel::save(const std::filesystem::path& path) const {
  write_json_file(path, to_json());
}

CnnModel CnnModel::load(const std::filesystem::path& path) {
  return from_json(read_json_file(path));
}

TraitProbs classifier_forward(const EncodedText& encoded, const CnnModel& model) {
  CnnTrace trace;
  return forward_impl(encoded, model, /*allow_short=*/false, trace);
}

TraitProbs classify(const EncodedText& encoded, const CnnModel& model) {
  CnnTrace trace;
  return forward_impl(encoded, model, /*allow_short=*/true, trace);
}

double classifier_loss(const TraitProbs& probs, const TraitBits& labels) {
  double total = 0.0;
  for (std::size_t d = 0; d < kNumTraits; ++d) {
    const double p = std::clamp(probs[d], kProbClamp, 1.0 - kProbClamp);
    total -= labels[d] ? std::log(p) : std::log(1.0 - p);
  }
  return total / static_cast<double>(kNumTraits);
}

double classifier_accumulate_grad(const EncodedText& encoded, const TraitBits& labels,
                                  CnnModel& model, double scale) {
  CnnTrace trace;
  forward_impl(encoded, model, /*allow_short=*/true, trace);
  const std::size_t f = model.config().num_filters;
  const std::size_t k = model.config().embed_dim;
  const std::size_t m = model.config().window;

  // Sigmoid + BCE collapse to (p - y); the clamp only matters in the flat
  // region where the logit magnitude exceeds ~27.
  Matrix dpooled(1, f);
  for (std::size_t d = 0; d < kNumTraits; ++d) {
    const double dlogit =
        scale * (trace.probs[d] - labels[d]) / static_cast<double>(kNumTraits);
    for (std::size_t i = 0; i < f; ++i) {
      model.head_w[d].grad(i, 0) += dlogit * trace.pooled.values(0, i);
      dpooled(0, i) += dlogit * model.head_w[d].value(i, 0);
    }
    model.head_b[d].grad(0, 0) += dlogit;
  }

  const Matrix dact = max_over_time_backward(trace.pooled, dpooled, trace.act.rows());
  const Matrix dpre = activate_backward(Activation::kRelu, trace.pre, trace.act, dact);
  for (std::size_t p = 0; p < dpre.rows(); ++p) {
    for (std::size_t i = 0; i < f; ++i) model.conv_b.grad(0, i) += dpre(p, i);
  }
  matmul_at_b_acc(dpre, trace.windows, model.conv_w.grad);
  const Matrix dwindows = matmul(dpre, model.conv_w.value);
  for (std::size_t p = 0; p < dwindows.rows(); ++p) {
    for (std::size_t j = 0; j < m; ++j) {
      const auto id = static_cast<std::size_t>(trace.window_ids[p * m + j]);
      auto dst = model.embedding.grad.row(id);
      for (std::size_t c = 0; c < k; ++c) dst[c] += dwindows(p, j * k + c);
    }
  }
  return classifier_loss(trace.probs, labels);
}

TraitBits predict_labels(const TraitProbs& probs, double threshold) {
  TraitBits bits{};
  for (std::size_t d = 0; d < kNumTraits; ++d) bits[d] = probs[d] > threshold ? 1 : 0;
  return bits;
}

namespace {

std::array<double, kNumTraits> validation_accuracy(const std::vector<EncodedText>& encoded,
                                                   const std::vector<TraitBits>& labels,
                                                   const CnnModel& model) {
  std::array<double, kNumTraits> correct{};
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    const TraitBits pred = predict_labels(classify(encoded[i], model));
    for (std::size_t d = 0; d < kNumTraits; ++d) {
      if (pred[d] == labels[i][d]) correct[d] += 1.0;
    }
  }
  for (double& c : correct) c /= static_cast<double>(encoded.size());
  return correct;
}

double mean_of(const std::array<double, kNumTraits>& a) {
  return std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(kNumTraits);
}

}  // namespace

ClassifierTrainResult train_classifier(const std::vector<Document>& corpus,
                                       const CnnConfig& config, Rng& rng) {
  config.validate();
  if (corpus.size() < 10) {
    throw Error(ErrorKind::kInsufficientData,
                "classifier training needs at least 10 documents, got " +
                    std::to_string(corpus.size()));
  }
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (!corpus[i].labels) {
      throw Error(ErrorKind::kLabelMissing,
                  "document " + std::to_string(i) + " has no trait labels");
    }
  }

  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(order));
  const std::size_t n_val = std::max<std::size_t>(1, corpus.size() / 10);
  const std::size_t n_train = corpus.size() - n_val;

  std::vector<Tokens> train_tokens;
  train_tokens.reserve(n_train);
  for (std::size_t i = 0; i < n_train; ++i) train_tokens.push_back(corpus[order[i]].tokens);
  Vocabulary vocab = build_vocab(train_tokens, config.min_count, config.max_vocab);

  std::vector<EncodedText> train_x, val_x;
  std::vector<TraitBits> train_y, val_y;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const Document& doc = corpus[order[i]];
    auto& xs = i < n_train ? train_x : val_x;
    auto& ys = i < n_train ? train_y : val_y;
    xs.push_back(encode(doc.tokens, vocab, config.max_len));
    ys.push_back(*doc.labels);
  }

  ClassifierTrainResult result;
  result.train_size = n_train;
  result.val_size = n_val;
  result.model = CnnModel::init(config, std::move(vocab), rng);
  CnnModel& model = result.model;
  const auto params = model.parameters();
  const AdamOptions adam{.learning_rate = config.learning_rate};

  if (config.epochs == 0) {
    result.val_accuracy = validation_accuracy(val_x, val_y, model);
    result.history.push_back({0, 0.0, result.val_accuracy, mean_of(result.val_accuracy)});
    return result;
  }

  CnnModel best = model;
  double best_mean = -1.0;
  std::vector<std::size_t> batch_order(n_train);
  std::iota(batch_order.begin(), batch_order.end(), std::size_t{0});
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(batch_order));
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n_train; start += config.batch_size) {
      const std::size_t end = std::min(n_train, start + config.batch_size);
      const double scale = 1.0 / static_cast<double>(end - start);
      model.zero_grad();
      for (std::size_t i = start; i < end; ++i) {
        const std::size_t idx = batch_order[i];
        loss_sum += classifier_accumulate_grad(train_x[idx], train_y[idx], model, scale);
      }
      clip_global_norm(params, config.max_grad_norm);
      for (Parameter* p : params) adam_step(*p, adam);
    }
    ClassifierEpoch record;
    record.epoch = epoch;
    record.train_loss = loss_sum / static_cast<double>(n_train);
    record.val_accuracy = validation_accuracy(val_x, val_y, model);
    record.mean_val_accuracy = mean_of(record.val_accuracy);
    result.history.push_back(record);
    if (record.mean_val_accuracy > best_mean) {
      best_mean = record.mean_val_accuracy;
      best = model;
      result.best_epoch = epoch;
      result.val_accuracy = record.val_accuracy;
    }
  }
  result.model = std::move(best);
  result.model.zero_grad();
  return result;
}

std::vector<Document> label_corpus(const std::vector<Document>& docs,
                                   const CnnModel& model, std::size_t threads) {
  std::vector<Document> out = docs;
  parallel_for(out.size(), threads, [&](std::size_t i) {
    const EncodedText enc = encode(out[i].tokens, model.vocab(), model.config().max_len);
    out[i].labels = predict_labels(classify(enc, model));
  });
  return out;
}

double unk_rate(const std::vector<Document>& docs, const Vocabulary& vocab) {
  std::size_t total = 0;
  std::size_t unknown = 0;
  for (const Document& doc : docs) {
    for (const std::string& tok : doc.tokens) {
      ++total;
      if (!vocab.contains(tok)) ++unknown;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(unknown) / static_cast<double>(total);
}

}  // namespace persona
