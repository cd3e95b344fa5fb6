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

#include <cmath>
#include <set>
#include <vector>

#include "gtest/gtest.h"
#include "persona/error.h"
#include "persona/generator.h"
#include "persona/ops.h"
#include "test_util.h"

namespace persona {
namespace {

using testing::random_tokens;
using testing::toy_vocab;

LstmConfig toy_config(std::size_t cond_dim = kNumTraits) {
  LstmConfig c;
  c.embed_dim = 4;
  c.hidden_dim = 5;
  c.cond_dim = cond_dim;
  c.max_len = 4;
  return c;
}

LstmModel toy_model(const LstmConfig& config, std::size_t n_tokens, std::uint64_t seed) {
  Rng rng(seed);
  LstmModel m = LstmModel::init(config, toy_vocab(n_tokens), rng);
  for (double& v : m.gate_b.value.flat()) v += rng.uniform(-0.3, 0.3);
  for (double& v : m.out_b.value.flat()) v = rng.uniform(-0.3, 0.3);
  return m;
}

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

TEST(LstmInitTest, ForgetBiasIsOne) {
  const LstmModel m = toy_model(toy_config(), 6, 1);
  Rng rng(1);
  const LstmModel fresh = LstmModel::init(toy_config(), toy_vocab(6), rng);
  for (std::size_t j = 0; j < 5; ++j) {
    EXPECT_EQ(fresh.gate_b.value(0, j), 0.0);
    EXPECT_EQ(fresh.gate_b.value(0, 5 + j), 1.0);
    EXPECT_EQ(fresh.gate_b.value(0, 10 + j), 0.0);
    EXPECT_EQ(fresh.gate_b.value(0, 15 + j), 0.0);
  }
  EXPECT_EQ(m.gate_w.value.rows(), 4u + 5u + 5u);
  EXPECT_EQ(m.gate_w.value.cols(), 20u);
}

TEST(LstmStepTest, ZeroWeights) {
  LstmModel m = toy_model(toy_config(), 6, 2);
  m.gate_w.value.fill(0.0);
  m.gate_b.value.fill(0.0);
  const std::vector<double> x(9, 0.7);
  const LstmState zero{std::vector<double>(5, 0.0), std::vector<double>(5, 0.0)};
  const LstmState a = lstm_step(x, zero, m);
  for (std::size_t j = 0; j < 5; ++j) {
    EXPECT_EQ(a.h[j], 0.0);
    EXPECT_EQ(a.c[j], 0.0);
  }
  const LstmState s{std::vector<double>(5, 0.2), {1.0, -2.0, 0.5, 3.0, -0.25}};
  const LstmState b = lstm_step(x, s, m);
  for (std::size_t j = 0; j < 5; ++j) EXPECT_EQ(b.c[j], 0.5 * s.c[j]);
}

TEST(LstmStepTest, ScalarOracle) {
  LstmConfig c = toy_config(0);
  c.hidden_dim = 3;
  const LstmModel m = toy_model(c, 6, 3);
  Rng rng(4);
  std::vector<double> x(4);
  for (double& v : x) v = rng.uniform(-1, 1);
  LstmState s{{0.1, -0.4, 0.3}, {0.5, -1.0, 0.2}};
  const LstmState out = lstm_step(x, s, m);
  const std::size_t hid = 3;
  for (std::size_t j = 0; j < hid; ++j) {
    double z[4];
    for (std::size_t g = 0; g < 4; ++g) {
      z[g] = m.gate_b.value(0, g * hid + j);
      for (std::size_t r = 0; r < 4; ++r) z[g] += x[r] * m.gate_w.value(r, g * hid + j);
      for (std::size_t r = 0; r < hid; ++r) z[g] += s.h[r] * m.gate_w.value(4 + r, g * hid + j);
    }
    const double cn = sig(z[1]) * s.c[j] + sig(z[0]) * std::tanh(z[2]);
    EXPECT_NEAR(out.c[j], cn, 1e-12);
    EXPECT_NEAR(out.h[j], sig(z[3]) * std::tanh(cn), 1e-12);
  }
}

TEST(LstmStepTest, ShapeMismatch) {
  const LstmModel m = toy_model(toy_config(), 6, 5);
  const LstmState s{std::vector<double>(5, 0.0), std::vector<double>(5, 0.0)};
  try {
    lstm_step(std::vector<double>(3, 0.0), s, m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidShape);
  }
}

TEST(LstmStepTest, HiddenBounded) {
  LstmModel m = toy_model(toy_config(), 6, 6);
  for (double& v : m.gate_w.value.flat()) v *= 20.0;
  Rng rng(7);
  LstmState s{std::vector<double>(5, 0.0), std::vector<double>(5, 0.0)};
  for (int t = 0; t < 50; ++t) {
    std::vector<double> x(9);
    for (double& v : x) v = rng.uniform(-3, 3);
    s = lstm_step(x, s, m);
    for (double h : s.h) EXPECT_LT(std::abs(h), 1.0);
  }
}

TEST(GeneratorForwardTest, UnrollOracle) {
  LstmConfig c = toy_config();
  c.max_len = 5;
  const LstmModel m = toy_model(c, 6, 8);
  const EncodedText e = encode(Tokens{"t3", "t0", "t5"}, m.vocab(), 5);  // 3 steps + EOS
  const TraitBits cond{1, 0, 0, 1, 1};
  const Matrix logits = generator_forward(e, cond, m);
  ASSERT_EQ(logits.rows(), 4u);
  LstmState s{std::vector<double>(5, 0.0), std::vector<double>(5, 0.0)};
  for (std::size_t t = 0; t < 4; ++t) {
    std::vector<double> x(9);
    for (std::size_t q = 0; q < 4; ++q) x[q] = m.embedding.value(e.ids[t], q);
    for (std::size_t q = 0; q < 5; ++q) x[4 + q] = cond[q];
    s = lstm_step(x, s, m);
    const Matrix expected = affine(Matrix::row_vector(s.h), m.out_w.value, m.out_b.value);
    for (std::size_t j = 0; j < logits.cols(); ++j) {
      EXPECT_NEAR(logits(t, j), expected(0, j), 1e-12);
    }
  }
}

TEST(GeneratorForwardTest, ZeroedConditionRowsGiveIdenticalOutputs) {
  LstmModel m = toy_model(toy_config(), 6, 9);
  for (std::size_t r = 4; r < 9; ++r) {
    for (double& v : m.gate_w.value.row(r)) v = 0.0;
  }
  const EncodedText e = encode(Tokens{"t1", "t2"}, m.vocab(), 4);
  const Matrix reference = generator_forward(e, TraitBits{}, m);
  for (unsigned mask = 1; mask < 32; ++mask) {
    TraitBits bits{};
    for (std::size_t d = 0; d < 5; ++d) bits[d] = (mask >> d) & 1;
    EXPECT_EQ(generator_forward(e, bits, m), reference);
  }
}

TEST(GeneratorForwardTest, ConditionArity) {
  const LstmModel cond = toy_model(toy_config(), 6, 10);
  const LstmModel plain = toy_model(toy_config(0), 6, 10);
  const EncodedText e = encode(Tokens{"t1"}, cond.vocab(), 4);
  try {
    generator_forward(e, std::nullopt, cond);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::kConditionArity);
  }
  try {
    generator_forward(e, TraitBits{}, plain);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::kConditionArity);
  }
}

TEST(GeneratorLossTest, Examples) {
  const Vocabulary v = toy_vocab(6);  // V = 10
  const EncodedText e = encode(Tokens{"t0", "t4"}, v, 5);  // BOS t0 t4 EOS PAD
  Matrix perfect(4, 10, -1e4);
  for (std::size_t t = 0; t < 4; ++t) {
    const auto target = static_cast<std::size_t>(e.ids[t + 1]);
    perfect(t, target == 0 ? 0 : target) = 0.0;
  }
  EXPECT_NEAR(generator_loss(perfect, e), 0.0, 1e-12);
  EXPECT_NEAR(generator_loss(Matrix(4, 10), e), std::log(10.0), 1e-12);

  Rng rng(11);
  Matrix logits(4, 10);
  for (double& x : logits.flat()) x = rng.uniform(-2, 2);
  double hand = 0;
  for (std::size_t t = 0; t < 3; ++t) {
    double z = 0;
    for (double x : logits.row(t)) z += std::exp(x);
    hand += std::log(z) - logits(t, static_cast<std::size_t>(e.ids[t + 1]));
  }
  EXPECT_NEAR(generator_loss(logits, e), hand / 3, 1e-12);
}

TEST(GeneratorGradTest, FullModelCheck) {
  for (std::size_t cond_dim : {std::size_t{0}, kNumTraits}) {
    LstmModel m = toy_model(toy_config(cond_dim), 16, 12);  // V = 20
    const EncodedText a = encode(Tokens{"t3", "t9"}, m.vocab(), 4);  // 3 predicted steps
    const EncodedText b = encode(Tokens{"t12"}, m.vocab(), 4);       // 2 steps, then PAD
    std::vector<GeneratorBatchItem> batch{{&a, std::nullopt}, {&b, std::nullopt}};
    if (cond_dim) {
      batch[0].condition = TraitBits{1, 0, 1, 1, 0};
      batch[1].condition = TraitBits{0, 1, 1, 0, 0};
    }
    m.zero_grad();
    const BatchLoss analytic = generator_batch_backward(batch, m);
    EXPECT_EQ(analytic.weight, 5.0);
    auto loss = [&] { return generator_batch_loss(batch, m).loss; };
    EXPECT_EQ(loss(), analytic.loss);
    const auto named = m.named_parameters();
    const auto report = gradient_check(loss, named);
    EXPECT_TRUE(report.passed) << "cond_dim " << cond_dim << ": " << report.max_rel_error;
    EXPECT_LT(report.max_rel_error, 1e-4);
  }
}

TEST(GeneratorBatchTest, MatchesPerSequenceForward) {
  LstmConfig c = toy_config();
  c.max_len = 8;
  const LstmModel m = toy_model(c, 10, 13);
  Rng rng(14);
  std::vector<EncodedText> enc;
  std::vector<TraitBits> conds;
  for (int i = 0; i < 4; ++i) {
    enc.push_back(encode(random_tokens(1 + rng.uniform_int(6), 10, rng), m.vocab(), 8));
    TraitBits bits{};
    for (auto& x : bits) x = static_cast<std::uint8_t>(rng.uniform_int(2));
    conds.push_back(bits);
  }
  std::vector<GeneratorBatchItem> batch;
  double weighted = 0, weight = 0;
  for (int i = 0; i < 4; ++i) {
    batch.push_back({&enc[i], conds[i]});
    const double n = static_cast<double>(enc[i].valid_length() - 1);
    weighted += n * generator_loss(generator_forward(enc[i], conds[i], m), enc[i]);
    weight += n;
  }
  const BatchLoss bl = generator_batch_loss(batch, m);
  EXPECT_EQ(bl.weight, weight);
  EXPECT_NEAR(bl.loss, weighted / weight, 1e-12);
}

std::vector<Document> random_corpus(std::size_t n, std::size_t n_tokens, std::uint64_t seed,
                                    bool labeled) {
  Rng rng(seed);
  std::vector<Document> docs;
  for (std::size_t i = 0; i < n; ++i) {
    Document d;
    d.tokens = random_tokens(3 + rng.uniform_int(10), n_tokens, rng);
    d.text = join_tokens(d.tokens);
    if (labeled) {
      TraitBits bits{};
      for (auto& x : bits) x = static_cast<std::uint8_t>(rng.uniform_int(2));
      d.labels = bits;
    }
    docs.push_back(std::move(d));
  }
  return docs;
}

TEST(GeneratorUntrainedTest, CrossEntropyNearLogV) {
  LstmConfig c;  // default dims
  c.max_len = 16;
  const auto docs = random_corpus(50, 300, 15, true);
  Rng rng(16);
  std::vector<Tokens> toks;
  for (const auto& d : docs) toks.push_back(d.tokens);
  const LstmModel m = LstmModel::init(c, build_vocab(toks, 1, 20000), rng);
  const double log_v = std::log(static_cast<double>(m.vocab().size()));
  const double ppl = perplexity(m, docs);
  EXPECT_NEAR(std::log(ppl), log_v, 0.02 * log_v);
  EXPECT_NEAR(ppl, static_cast<double>(m.vocab().size()),
              0.1 * static_cast<double>(m.vocab().size()));
}

TEST(TrainGeneratorTest, SmokeAndDeterminism) {
  LstmConfig c = toy_config();
  c.max_len = 16;
  c.epochs = 1;
  c.min_count = 1;
  const auto docs = random_corpus(10, 8, 17, true);
  Rng a(18), b(18);
  const auto ra = train_generator(docs, c, a);
  const auto rb = train_generator(docs, c, b);
  ASSERT_EQ(ra.epoch_losses.size(), 1u);
  EXPECT_TRUE(std::isfinite(ra.epoch_losses[0]));
  EXPECT_EQ(ra.model.to_json().dump(), rb.model.to_json().dump());
}

TEST(TrainGeneratorTest, MissingLabels) {
  LstmConfig c = toy_config();
  c.max_len = 16;
  c.epochs = 1;
  const auto docs = random_corpus(10, 8, 19, false);
  Rng rng(20);
  try {
    train_generator(docs, c, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kLabelMissing);
  }
  c.cond_dim = 0;
  EXPECT_NO_THROW(train_generator(docs, c, rng));
}

TEST(TrainGeneratorTest, LearnsDeterministicCycle) {
  // Every document walks the cycle t0 t1 ... t5 from a random start.
  Rng rng(21);
  std::vector<Document> docs;
  for (int i = 0; i < 200; ++i) {
    Document d;
    const std::size_t start = rng.uniform_int(6);
    for (std::size_t j = 0; j < 8; ++j) d.tokens.push_back("t" + std::to_string((start + j) % 6));
    d.text = join_tokens(d.tokens);
    docs.push_back(std::move(d));
  }
  LstmConfig c;
  c.cond_dim = 0;
  c.embed_dim = 8;
  c.hidden_dim = 16;
  c.max_len = 12;
  c.epochs = 6;
  c.min_count = 1;
  c.learning_rate = 1e-2;
  Rng train_rng(22);
  const auto untrained = LstmModel::init(c, toy_vocab(6), train_rng);
  const auto res = train_generator(docs, c, train_rng);
  EXPECT_LT(res.epoch_losses.back(), 0.9 * res.epoch_losses.front());
  EXPECT_LT(perplexity(res.model, docs), perplexity(untrained, docs));
}

// Output layer that always prefers `token`.
LstmModel forced_model(const std::string& token) {
  LstmModel m = toy_model(toy_config(0), 6, 23);
  m.out_w.value.fill(0.0);
  m.out_b.value.fill(0.0);
  m.out_b.value(0, static_cast<std::size_t>(m.vocab().id_of(token))) = 50.0;
  return m;
}

TEST(GenerateTest, ForcedTokenStopsOnRun) {
  const LstmModel m = forced_model("t2");
  const std::vector<std::string> pool{"t0"};
  Rng rng(24);
  const Generation g = generate(m, std::nullopt, pool, {0.0, 40}, rng);
  EXPECT_EQ(g.seed_word, "t0");
  EXPECT_EQ(g.tokens, (Tokens{"t0", "t2", "t2"}));
  Rng rng2(25);
  EXPECT_EQ(generate(m, std::nullopt, pool, {1.0, 40}, rng2).tokens, g.tokens);
}

TEST(GenerateTest, ForcedEosStopsImmediately) {
  LstmModel m = forced_model("t2");
  m.out_b.value.fill(0.0);
  m.out_b.value(0, Vocabulary::kEos) = 50.0;
  const std::vector<std::string> pool{"t4"};
  Rng rng(26);
  EXPECT_EQ(generate(m, std::nullopt, pool, {0.0, 40}, rng).tokens, (Tokens{"t4"}));
}

TEST(GenerateTest, SpecialsNeverEmitted) {
  LstmModel m = forced_model("t2");
  m.out_b.value.fill(0.0);
  m.out_b.value(0, Vocabulary::kPad) = 80.0;
  m.out_b.value(0, Vocabulary::kUnk) = 80.0;
  m.out_b.value(0, Vocabulary::kBos) = 80.0;
  const std::vector<std::string> pool{"t1"};
  Rng rng(27);
  const Generation g = generate(m, std::nullopt, pool, {1.0, 10}, rng);
  for (const auto& t : g.tokens) {
    EXPECT_FALSE(Vocabulary::is_special(m.vocab().id_of(t))) << t;
  }
}

TEST(GenerateTest, ContractOnRandomModel) {
  const LstmModel m = toy_model(toy_config(), 6, 28);
  const std::vector<std::string> pool{"t0", "t1", "t2"};
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    Rng rng(seed);
    const Generation g = generate(m, TraitBits{1, 0, 1, 0, 1}, pool, {1.0, 7}, rng);
    ASSERT_FALSE(g.tokens.empty());
    EXPECT_LE(g.tokens.size(), 7u);
    EXPECT_EQ(g.tokens[0], g.seed_word);
    for (std::size_t i = 2; i < g.tokens.size(); ++i) {
      EXPECT_FALSE(g.tokens[i] == g.tokens[i - 1] && g.tokens[i] == g.tokens[i - 2]);
    }
    for (const auto& t : g.tokens) EXPECT_TRUE(m.vocab().contains(t));
  }
}

TEST(GenerateTest, DeterministicGivenSeed) {
  const LstmModel m = toy_model(toy_config(), 6, 29);
  const std::vector<std::string> pool{"t0", "t1", "t2", "t3"};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng a(seed), b(seed);
    EXPECT_EQ(generate(m, TraitBits{}, pool, {0.8, 12}, a).tokens,
              generate(m, TraitBits{}, pool, {0.8, 12}, b).tokens);
  }
}

TEST(GenerateTest, GreedyDependsOnlyOnSeedWord) {
  const LstmModel m = toy_model(toy_config(), 6, 30);
  const std::vector<std::string> pool{"t3"};
  Rng a(1), b(999);
  EXPECT_EQ(generate(m, TraitBits{1, 1, 1, 1, 1}, pool, {0.0, 12}, a).tokens,
            generate(m, TraitBits{1, 1, 1, 1, 1}, pool, {0.0, 12}, b).tokens);
}

TEST(GenerateTest, SeedPoolErrors) {
  const LstmModel m = toy_model(toy_config(), 6, 31);
  Rng rng(1);
  for (const std::vector<std::string>& pool :
       {std::vector<std::string>{}, std::vector<std::string>{"t0", "nope"}}) {
    try {
      generate(m, TraitBits{}, pool, {}, rng);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kSeedPool);
    }
  }
}

TEST(RepetitionTest, Rule) {
  using T = std::vector<std::string>;
  EXPECT_EQ(repetition_trim(T{"a", "a"}), 0u);
  EXPECT_EQ(repetition_trim(T{"a", "a", "a"}), 1u);
  EXPECT_EQ(repetition_trim(T{"b", "a", "b", "a"}), 0u);
  EXPECT_EQ(repetition_trim(T{"a", "b", "c", "d", "x", "a", "b", "c", "d"}), 4u);
  EXPECT_EQ(repetition_trim(T{"a", "b", "c", "d", "a", "b", "c"}), 0u);
  // Overlapping occurrence: a b a b a b a b repeats "a b a b".
  EXPECT_EQ(repetition_trim(T{"a", "b", "a", "b", "a", "b"}), 4u);
}

TEST(CheckpointTest, LstmRoundTripBitIdentical) {
  const LstmModel m = toy_model(toy_config(), 6, 32);
  const LstmModel back = LstmModel::from_json(nlohmann::json::parse(m.to_json().dump()));
  Rng rng(33);
  for (int trial = 0; trial < 10; ++trial) {
    const EncodedText e = encode(random_tokens(2, 6, rng), m.vocab(), 4);
    EXPECT_EQ(generator_forward(e, TraitBits{1, 0, 0, 1, 0}, m),
              generator_forward(e, TraitBits{1, 0, 0, 1, 0}, back));
  }
  EXPECT_EQ(back.config().cond_dim, 5u);
}

}  // namespace
}  // namespace persona
