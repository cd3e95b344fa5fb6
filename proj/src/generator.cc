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

#include "persona/generator.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "persona/checkpoint.h"
#include "persona/error.h"
#include "persona/ops.h"

namespace persona {

using nlohmann::json;

namespace {

void check_condition(const LstmModel& model, const std::optional<TraitBits>& condition) {
  if (model.config().conditional() != condition.has_value()) {
    throw Error(ErrorKind::kConditionArity,
                model.config().conditional()
                    ? "conditional generator requires a five-trait condition"
                    : "unconditional generator does not accept a condition");
  }
}

std::size_t last_valid_index(const EncodedText& e) {
  std::size_t last = 0;
  for (std::size_t t = 0; t < e.mask.size(); ++t) {
    if (e.mask[t]) last = t;
  }
  return last;
}

struct BatchTrace {
  std::size_t batch = 0;
  std::size_t steps = 0;
  std::vector<Matrix> inputs;  // per step: B x (k + cond + H)
  std::vector<Matrix> gates;   // per step: B x 4H, post-activation
  std::vector<Matrix> cells;   // per step: B x H
  std::vector<Matrix> tanh_cells;
  Matrix hidden;               // (steps * B) x H, row t*B + b
};

TokenId input_id(const EncodedText& e, std::size_t t) {
  return t < e.ids.size() ? e.ids[t] : Vocabulary::kPad;
}

// Runs `steps` teacher-forced steps over the batch and returns logits with
// row t*B + b predicting position t+1 of item b.
Matrix forward_batch(std::span<const GeneratorBatchItem> items, const LstmModel& model,
                     std::size_t steps, BatchTrace& trace) {
  const LstmConfig& cfg = model.config();
  const std::size_t batch = items.size();
  const std::size_t k = cfg.embed_dim;
  const std::size_t cond = cfg.cond_dim;
  const std::size_t hid = cfg.hidden_dim;
  const std::size_t in_dim = k + cond + hid;
  const std::size_t vocab = model.embedding.value.rows();

  trace.batch = batch;
  trace.steps = steps;
  trace.inputs.assign(steps, Matrix());
  trace.gates.assign(steps, Matrix());
  trace.cells.assign(steps, Matrix());
  trace.tanh_cells.assign(steps, Matrix());
  trace.hidden = Matrix(steps * batch, hid);

  Matrix c_prev(batch, hid);
  for (std::size_t t = 0; t < steps; ++t) {
    Matrix x(batch, in_dim);
    for (std::size_t b = 0; b < batch; ++b) {
      const TokenId id = input_id(*items[b].encoded, t);
      if (id < 0 || static_cast<std::size_t>(id) >= vocab) {
        throw Error(ErrorKind::kInvalidId,
                    "token id " + std::to_string(id) + " outside generator vocabulary");
      }
      auto row = x.row(b);
      auto emb = model.embedding.value.row(static_cast<std::size_t>(id));
      std::copy(emb.begin(), emb.end(), row.begin());
      for (std::size_t j = 0; j < cond; ++j) row[k + j] = (*items[b].condition)[j];
      if (t > 0) {
        auto h_prev = trace.hidden.row((t - 1) * batch + b);
        std::copy(h_prev.begin(), h_prev.end(), row.begin() + static_cast<std::ptrdiff_t>(k + cond));
      }
    }
    Matrix z = affine(x, model.gate_w.value, model.gate_b.value);
    Matrix c(batch, hid);
    Matrix tc(batch, hid);
    for (std::size_t b = 0; b < batch; ++b) {
      auto zr = z.row(b);
      for (std::size_t j = 0; j < hid; ++j) {
        const double ig = sigmoid(zr[j]);
        const double fg = sigmoid(zr[hid + j]);
        const double gg = std::tanh(zr[2 * hid + j]);
        const double og = sigmoid(zr[3 * hid + j]);
        zr[j] = ig;
        zr[hid + j] = fg;
        zr[2 * hid + j] = gg;
        zr[3 * hid + j] = og;
        c(b, j) = fg * c_prev(b, j) + ig * gg;
        tc(b, j) = std::tanh(c(b, j));
        trace.hidden(t * batch + b, j) = og * tc(b, j);
      }
    }
    trace.inputs[t] = std::move(x);
    trace.gates[t] = std::move(z);
    c_prev = c;
    trace.cells[t] = std::move(c);
    trace.tanh_cells[t] = std::move(tc);
  }
  return affine(trace.hidden, model.out_w.value, model.out_b.value);
}

void backward_batch(std::span<const GeneratorBatchItem> items, LstmModel& model,
                    const BatchTrace& trace, const Matrix& dlogits) {
  const LstmConfig& cfg = model.config();
  const std::size_t batch = trace.batch;
  const std::size_t k = cfg.embed_dim;
  const std::size_t cond = cfg.cond_dim;
  const std::size_t hid = cfg.hidden_dim;

  Matrix dhidden;
  affine_backward(trace.hidden, model.out_w.value, dlogits, &dhidden, model.out_w.grad,
                  model.out_b.grad);

  const Matrix gate_wt = model.gate_w.value.transposed();
  Matrix dh_next(batch, hid);
  Matrix dc_next(batch, hid);
  Matrix dz(batch, 4 * hid);
  for (std::size_t step = trace.steps; step-- > 0;) {
    const Matrix& g = trace.gates[step];
    const Matrix& tc = trace.tanh_cells[step];
    for (std::size_t b = 0; b < batch; ++b) {
      auto dhr = dhidden.row(step * batch + b);
      for (std::size_t j = 0; j < hid; ++j) {
        const double ig = g(b, j);
        const double fg = g(b, hid + j);
        const double gg = g(b, 2 * hid + j);
        const double og = g(b, 3 * hid + j);
        const double c_prev = step > 0 ? trace.cells[step - 1](b, j) : 0.0;
        const double dh = dhr[j] + dh_next(b, j);
        const double dc = dc_next(b, j) + dh * og * (1.0 - tc(b, j) * tc(b, j));
        dz(b, j) = dc * gg * ig * (1.0 - ig);
        dz(b, hid + j) = dc * c_prev * fg * (1.0 - fg);
        dz(b, 2 * hid + j) = dc * ig * (1.0 - gg * gg);
        dz(b, 3 * hid + j) = dh * tc(b, j) * og * (1.0 - og);
        dc_next(b, j) = dc * fg;
      }
    }
    matmul_at_b_acc(trace.inputs[step], dz, model.gate_w.grad);
    for (std::size_t b = 0; b < batch; ++b) {
      auto src = dz.row(b);
      auto dst = model.gate_b.grad.row(0);
      for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
    }
    const Matrix dx = matmul(dz, gate_wt);
    for (std::size_t b = 0; b < batch; ++b) {
      auto dxr = dx.row(b);
      const auto id = static_cast<std::size_t>(input_id(*items[b].encoded, step));
      auto demb = model.embedding.grad.row(id);
      for (std::size_t j = 0; j < k; ++j) demb[j] += dxr[j];
      for (std::size_t j = 0; j < hid; ++j) dh_next(b, j) = dxr[k + cond + j];
    }
  }
}

struct BatchTargets {
  std::vector<std::int32_t> ids;
  std::vector<std::uint8_t> mask;
};

BatchTargets batch_targets(std::span<const GeneratorBatchItem> items, std::size_t steps) {
  const std::size_t batch = items.size();
  BatchTargets out{std::vector<std::int32_t>(steps * batch, Vocabulary::kPad),
                   std::vector<std::uint8_t>(steps * batch, 0)};
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t b = 0; b < batch; ++b) {
      const EncodedText& e = *items[b].encoded;
      if (t + 1 < e.ids.size()) {
        out.ids[t * batch + b] = e.ids[t + 1];
        out.mask[t * batch + b] = e.mask[t + 1];
      }
    }
  }
  return out;
}

std::size_t batch_steps(std::span<const GeneratorBatchItem> batch, const LstmModel& model) {
  if (batch.empty()) throw Error(ErrorKind::kEmptyInput, "generator batch is empty");
  std::size_t steps = 0;
  for (const auto& item : batch) {
    check_condition(model, item.condition);
    steps = std::max(steps, last_valid_index(*item.encoded));
  }
  if (steps == 0) {
    throw Error(ErrorKind::kDegenerateMask, "generator batch has nothing to predict");
  }
  return steps;
}

}  // namespace

void LstmConfig::validate() const {
  if (embed_dim < 1 || hidden_dim < 1) {
    throw Error(ErrorKind::kConfiguration, "lstm: embed_dim and hidden_dim must be >= 1");
  }
  if (cond_dim != 0 && cond_dim != kNumTraits) {
    throw Error(ErrorKind::kConfiguration, "lstm: cond_dim must be 0 or 5");
  }
  if (max_len < 2) throw Error(ErrorKind::kConfiguration, "lstm: max_len must be >= 2");
  if (batch_size < 1) throw Error(ErrorKind::kConfiguration, "lstm: batch_size must be >= 1");
  if (!(learning_rate > 0.0)) {
    throw Error(ErrorKind::kConfiguration, "lstm: learning_rate must be positive");
  }
  if (!(temperature >= 0.0)) {
    throw Error(ErrorKind::kConfiguration, "lstm: temperature must be non-negative");
  }
}

json to_json(const LstmConfig& c) {
  return {{"embed_dim", c.embed_dim},       {"hidden_dim", c.hidden_dim},
          {"cond_dim", c.cond_dim},         {"vocab_size", c.vocab_size},
          {"max_len", c.max_len},           {"epochs", c.epochs},
          {"batch_size", c.batch_size},     {"learning_rate", c.learning_rate},
          {"temperature", c.temperature},   {"max_grad_norm", c.max_grad_norm},
          {"min_count", c.min_count},       {"max_vocab", c.max_vocab}};
}

LstmConfig lstm_config_from_json(const json& j) {
  LstmConfig c;
  c.embed_dim = j.value("embed_dim", c.embed_dim);
  c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
  c.cond_dim = j.value("cond_dim", c.cond_dim);
  c.vocab_size = j.value("vocab_size", c.vocab_size);
  c.max_len = j.value("max_len", c.max_len);
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.temperature = j.value("temperature", c.temperature);
  c.max_grad_norm = j.value("max_grad_norm", c.max_grad_norm);
  c.min_count = j.value("min_count", c.min_count);
  c.max_vocab = j.value("max_vocab", c.max_vocab);
  return c;
}

LstmModel LstmModel::init(const LstmConfig& config, Vocabulary vocab, Rng& rng) {
  config.validate();
  LstmModel model;
  model.config_ = config;
  model.config_.vocab_size = vocab.size();
  model.vocab_ = std::move(vocab);
  const std::size_t v = model.config_.vocab_size;
  const std::size_t hid = config.hidden_dim;
  model.embedding = Parameter(xavier_init(v, config.embed_dim, rng));
  model.gate_w =
      Parameter(xavier_init(config.embed_dim + config.cond_dim + hid, 4 * hid, rng));
  Matrix gate_bias(1, 4 * hid);
  for (std::size_t j = hid; j < 2 * hid; ++j) gate_bias(0, j) = 1.0;
  model.gate_b = Parameter(std::move(gate_bias));
  model.out_w = Parameter(xavier_init(hid, v, rng));
  model.out_b = Parameter(Matrix(1, v));
  return model;
}

std::vector<Parameter*> LstmModel::parameters() {
  return {&embedding, &gate_w, &gate_b, &out_w, &out_b};
}

std::vector<NamedParameter> LstmModel::named_parameters() {
  return {{"embedding", &embedding},
          {"gate_w", &gate_w},
          {"gate_b", &gate_b},
          {"out_w", &out_w},
          {"out_b", &out_b}};
}

void LstmModel::zero_grad() {
  for (Parameter* p : parameters()) p->zero_grad();
}

json LstmModel::to_json() const {
  json params = json::object();
  params["embedding"] = matrix_to_json(embedding.value);
  params["gate_w"] = matrix_to_json(gate_w.value);
  params["gate_b"] = matrix_to_json(gate_b.value);
  params["out_w"] = matrix_to_json(out_w.value);
  params["out_b"] = matrix_to_json(out_b.value);
  return {{"format_version", kCheckpointFormatVersion},
          {"kind", "lstm"},
          {"cond_dim", config_.cond_dim},
          {"config", persona::to_json(config_)},
          {"vocab", vocab_to_json(vocab_)},
          {"params", std::move(params)}};
}

LstmModel LstmModel::from_json(const json& doc) {
  check_checkpoint_header(doc, "lstm");
  LstmModel model;
  try {
    model.config_ = lstm_config_from_json(doc.at("config"));
    model.config_.validate();
    model.vocab_ = vocab_from_json(doc.at("vocab"));
    const auto& c = model.config_;
    if (c.vocab_size != model.vocab_.size()) {
      throw Error(ErrorKind::kValidation, "checkpoint vocab_size disagrees with vocab");
    }
    const json& params = doc.at("params");
    auto load = [&](const std::string& name, std::size_t rows, std::size_t cols) {
      Matrix m = matrix_from_json(params.at(name), name);
      if (m.rows() != rows || m.cols() != cols) {
        throw Error(ErrorKind::kValidation, "parameter " + name + " has wrong shape");
      }
      return Parameter(std::move(m));
    };
    model.embedding = load("embedding", c.vocab_size, c.embed_dim);
    model.gate_w = load("gate_w", c.embed_dim + c.cond_dim + c.hidden_dim, 4 * c.hidden_dim);
    model.gate_b = load("gate_b", 1, 4 * c.hidden_dim);
    model.out_w = load("out_w", c.hidden_dim, c.vocab_size);
    model.out_b = load("out_b", 1, c.vocab_size);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kValidation, std::string("malformed lstm checkpoint: ") + e.what());
  }
  return model;
}

void LstmModel::save(const std::filesystem::path& path) const {
  write_json_file(path, to_json());
}

LstmModel LstmModel::load(const std::filesystem::path& path) {
  return from_json(read_json_file(path));
}

LstmState lstm_step(std::span<const double> x, const LstmState& state,
                    const LstmModel& model) {
  const std::size_t hid = model.config().hidden_dim;
  const std::size_t in_dim = model.input_dim();
  if (x.size() != in_dim || state.h.size() != hid || state.c.size() != hid) {
    throw Error(ErrorKind::kInvalidShape, "lstm_step: expected input of size " +
                                              std::to_string(in_dim) +
                                              " and state of size " + std::to_string(hid));
  }
  const Matrix& w = model.gate_w.value;
  std::vector<double> z(model.gate_b.value.flat().begin(), model.gate_b.value.flat().end());
  auto accumulate_row = [&](double alpha, std::size_t r) {
    if (alpha == 0.0) return;
    auto wr = w.row(r);
    for (std::size_t j = 0; j < z.size(); ++j) z[j] += alpha * wr[j];
  };
  for (std::size_t r = 0; r < in_dim; ++r) accumulate_row(x[r], r);
  for (std::size_t r = 0; r < hid; ++r) accumulate_row(state.h[r], in_dim + r);

  LstmState next{std::vector<double>(hid), std::vector<double>(hid)};
  for (std::size_t j = 0; j < hid; ++j) {
    const double ig = sigmoid(z[j]);
    const double fg = sigmoid(z[hid + j]);
    const double gg = std::tanh(z[2 * hid + j]);
    const double og = sigmoid(z[3 * hid + j]);
    next.c[j] = fg * state.c[j] + ig * gg;
    next.h[j] = og * std::tanh(next.c[j]);
  }
  return next;
}

Matrix generator_forward(const EncodedText& encoded,
                         const std::optional<TraitBits>& condition,
                         const LstmModel& model) {
  check_condition(model, condition);
  if (encoded.ids.size() < 2) {
    throw Error(ErrorKind::kInvalidShape, "generator_forward: sequence shorter than 2");
  }
  const GeneratorBatchItem item{&encoded, condition};
  BatchTrace trace;
  return forward_batch(std::span(&item, 1), model, encoded.ids.size() - 1, trace);
}

double generator_loss(const Matrix& logits, const EncodedText& encoded) {
  if (encoded.ids.size() != logits.rows() + 1) {
    throw Error(ErrorKind::kInvalidShape, "generator_loss: logits rows must be T-1");
  }
  const std::vector<std::int32_t> targets(encoded.ids.begin() + 1, encoded.ids.end());
  const std::vector<std::uint8_t> mask(encoded.mask.begin() + 1, encoded.mask.end());
  return masked_cross_entropy(logits, targets, mask).loss;
}

BatchLoss generator_batch_loss(std::span<const GeneratorBatchItem> batch,
                               const LstmModel& model) {
  const std::size_t steps = batch_steps(batch, model);
  BatchTrace trace;
  const Matrix logits = forward_batch(batch, model, steps, trace);
  const BatchTargets targets = batch_targets(batch, steps);
  const CrossEntropy ce = masked_cross_entropy(logits, targets.ids, targets.mask);
  return {ce.loss, ce.weight};
}

BatchLoss generator_batch_backward(std::span<const GeneratorBatchItem> batch,
                                   LstmModel& model) {
  const std::size_t steps = batch_steps(batch, model);
  BatchTrace trace;
  const Matrix logits = forward_batch(batch, model, steps, trace);
  const BatchTargets targets = batch_targets(batch, steps);
  const CrossEntropy ce = masked_cross_entropy(logits, targets.ids, targets.mask);
  backward_batch(batch, model, trace, ce.dlogits);
  return {ce.loss, ce.weight};
}

GeneratorTrainResult train_generator(const std::vector<Document>& corpus,
                                     const LstmConfig& config, Rng& rng) {
  config.validate();
  if (corpus.empty()) {
    throw Error(ErrorKind::kInsufficientData, "generator training corpus is empty");
  }
  if (config.conditional()) {
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (!corpus[i].labels) {
        throw Error(ErrorKind::kLabelMissing,
                    "document " + std::to_string(i) +
                        " has no trait labels (train an unconditional model instead)");
      }
    }
  }
  std::vector<Tokens> tokens;
  tokens.reserve(corpus.size());
  for (const Document& doc : corpus) tokens.push_back(doc.tokens);
  Vocabulary vocab = build_vocab(tokens, config.min_count, config.max_vocab);

  std::vector<EncodedText> encoded;
  encoded.reserve(corpus.size());
  for (const Document& doc : corpus) encoded.push_back(encode(doc.tokens, vocab, config.max_len));

  GeneratorTrainResult result;
  result.model = LstmModel::init(config, std::move(vocab), rng);
  LstmModel& model = result.model;
  const auto params = model.parameters();
  const AdamOptions adam{.learning_rate = config.learning_rate};

  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<GeneratorBatchItem> batch;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    double weight_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) {
        const std::size_t idx = order[i];
        batch.push_back({&encoded[idx], config.conditional()
                                            ? corpus[idx].labels
                                            : std::optional<TraitBits>()});
      }
      model.zero_grad();
      const auto [loss, weight] = generator_batch_backward(batch, model);
      if (!std::isfinite(loss)) {
        throw Error(ErrorKind::kTrainingDivergence, "generator loss became non-finite");
      }
      loss_sum += loss * weight;
      weight_sum += weight;
      clip_global_norm(params, config.max_grad_norm);
      for (Parameter* p : params) adam_step(*p, adam);
    }
    result.epoch_losses.push_back(loss_sum / weight_sum);
  }
  model.zero_grad();
  return result;
}

std::size_t repetition_trim(std::span<const std::string> tokens) {
  const std::size_t n = tokens.size();
  if (n >= kRepeatRun) {
    bool run = true;
    for (std::size_t i = n - kRepeatRun + 1; i < n && run; ++i) run = tokens[i] == tokens[n - kRepeatRun];
    if (run) return 1;
  }
  if (n > kRepeatNgram) {
    const auto tail = tokens.subspan(n - kRepeatNgram);
    for (std::size_t s = 0; s + kRepeatNgram < n; ++s) {
      if (std::equal(tail.begin(), tail.end(), tokens.begin() + static_cast<std::ptrdiff_t>(s))) {
        return kRepeatNgram;
      }
    }
  }
  return 0;
}

Generation generate(const LstmModel& model, const std::optional<TraitBits>& condition,
                    std::span<const std::string> seed_pool, const GenerateOptions& options,
                    Rng& rng) {
  check_condition(model, condition);
  const Vocabulary& vocab = model.vocab();
  if (seed_pool.empty()) throw Error(ErrorKind::kSeedPool, "seed pool is empty");
  for (const std::string& s : seed_pool) {
    const TokenId id = vocab.id_of(s);
    if (Vocabulary::is_special(id)) {
      throw Error(ErrorKind::kSeedPool, "seed word not in vocabulary: " + s);
    }
  }
  if (options.max_len < 1) {
    throw Error(ErrorKind::kConfiguration, "generation max_len must be at least 1");
  }

  const LstmConfig& cfg = model.config();
  const std::size_t k = cfg.embed_dim;
  const std::size_t v = vocab.size();
  std::vector<double> x(model.input_dim(), 0.0);
  if (condition) {
    for (std::size_t j = 0; j < kNumTraits; ++j) x[k + j] = (*condition)[j];
  }
  LstmState state{std::vector<double>(cfg.hidden_dim, 0.0),
                  std::vector<double>(cfg.hidden_dim, 0.0)};
  auto feed = [&](TokenId id) {
    auto emb = model.embedding.value.row(static_cast<std::size_t>(id));
    std::copy(emb.begin(), emb.end(), x.begin());
    state = lstm_step(x, state, model);
  };

  Generation out;
  out.seed_word = seed_pool[rng.uniform_int(seed_pool.size())];
  out.tokens.push_back(out.seed_word);
  feed(Vocabulary::kBos);
  feed(vocab.id_of(out.seed_word));

  const bool greedy = options.temperature < kGreedyTemperature;
  std::vector<double> logits(v);
  std::vector<double> weights(v);
  while (out.tokens.size() < options.max_len) {
    std::copy(model.out_b.value.flat().begin(), model.out_b.value.flat().end(), logits.begin());
    for (std::size_t r = 0; r < state.h.size(); ++r) {
      const double hr = state.h[r];
      auto wr = model.out_w.value.row(r);
      for (std::size_t j = 0; j < v; ++j) logits[j] += hr * wr[j];
    }
    // Candidates: EOS and every non-special token.
    auto allowed = [](std::size_t id) {
      return id == static_cast<std::size_t>(Vocabulary::kEos) ||
             id >= Vocabulary::kNumSpecials;
    };
    std::size_t chosen = Vocabulary::kEos;
    if (greedy) {
      double best = -INFINITY;
      for (std::size_t j = 0; j < v; ++j) {
        if (allowed(j) && logits[j] > best) {
          best = logits[j];
          chosen = j;
        }
      }
    } else {
      double mx = -INFINITY;
      for (std::size_t j = 0; j < v; ++j) {
        if (allowed(j)) mx = std::max(mx, logits[j] / options.temperature);
      }
      double total = 0.0;
      for (std::size_t j = 0; j < v; ++j) {
        weights[j] = allowed(j) ? std::exp(logits[j] / options.temperature - mx) : 0.0;
        total += weights[j];
      }
      const double u = rng.uniform() * total;
      double cum = 0.0;
      for (std::size_t j = 0; j < v; ++j) {
        if (weights[j] == 0.0) continue;
        // Falls back to the last candidate if rounding leaves u >= total.
        chosen = j;
        cum += weights[j];
        if (u < cum) break;
      }
    }
    const auto id = static_cast<TokenId>(chosen);
    if (id == Vocabulary::kEos) break;
    out.tokens.push_back(vocab.token_of(id));
    if (const std::size_t trim = repetition_trim(out.tokens); trim > 0) {
      out.tokens.resize(out.tokens.size() - trim);
      break;
    }
    feed(id);
  }
  return out;
}

double perplexity(const LstmModel& model, const std::vector<Document>& corpus,
                  const std::optional<TraitBits>& fixed_condition) {
  if (corpus.empty()) {
    throw Error(ErrorKind::kInsufficientData, "perplexity needs a non-empty corpus");
  }
  std::vector<EncodedText> encoded;
  encoded.reserve(corpus.size());
  for (const Document& doc : corpus) {
    encoded.push_back(encode(doc.tokens, model.vocab(), model.config().max_len));
  }
  double loss_sum = 0.0;
  double weight_sum = 0.0;
  constexpr std::size_t kChunk = 64;
  std::vector<GeneratorBatchItem> batch;
  for (std::size_t start = 0; start < corpus.size(); start += kChunk) {
    batch.clear();
    for (std::size_t i = start; i < std::min(corpus.size(), start + kChunk); ++i) {
      std::optional<TraitBits> cond;
      if (model.config().conditional()) {
        cond = fixed_condition ? fixed_condition : corpus[i].labels;
        if (!cond) {
          throw Error(ErrorKind::kLabelMissing,
                      "document " + std::to_string(i) + " has no labels for conditioning");
        }
      }
      batch.push_back({&encoded[i], cond});
    }
    const auto [loss, weight] = generator_batch_loss(batch, model);
    loss_sum += loss * weight;
    weight_sum += weight;
  }
  return std::exp(loss_sum / weight_sum);
}

}  // namespace persona
