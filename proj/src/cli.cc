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

#include "persona/cli.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "persona/checkpoint.h"
#include "persona/classifier.h"
#include "persona/corpus.h"
#include "persona/error.h"
#include "persona/generator.h"
#include "persona/harness.h"
#include "persona/lexicon.h"
#include "persona/parallel.h"
#include "persona/traits.h"

namespace persona {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kConditionSyntax =
    "expected five comma-separated assignments covering E, A, C, N, O once each, "
    "e.g. \"E=1,A=0,C=1,N=0,O=1\"";

TokenizeMode parse_mode(const std::string& mode) {
  if (mode == "whitespace") return TokenizeMode::kWhitespace;
  if (mode == "cjk_char") return TokenizeMode::kCjkChar;
  throw Error(ErrorKind::kConfiguration, "unknown tokenize mode: " + mode);
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error(ErrorKind::kIo, "cannot create output directory " + dir.string());
  }
}

json trait_map(const std::array<double, kNumTraits>& values) {
  json j = json::object();
  for (std::size_t d = 0; d < kNumTraits; ++d) j[std::string(kTraitNames[d])] = values[d];
  return j;
}

json level_map(const TraitLevels& levels) {
  json j = json::object();
  for (std::size_t d = 0; d < kNumTraits; ++d) {
    j[std::string(kTraitNames[d])] = std::string(level_name(levels[d]));
  }
  return j;
}

// Resolved option values of one subcommand, as strings, keyed by name.
json resolved_options(const CLI::App& sub) {
  json j = json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name.empty()) continue;
    if (opt->get_type_size() == 0) {
      j[name] = opt->count() > 0;
    } else if (opt->count() > 0) {
      const auto& r = opt->results();
      j[name] = r.size() == 1 ? json(r[0]) : json(r);
    } else {
      j[name] = opt->get_default_str();
    }
  }
  return j;
}

struct Manifest {
  std::string command;
  json config;
  std::optional<std::uint64_t> seed;
  std::vector<std::pair<std::string, fs::path>> inputs;
  std::vector<std::string> outputs;

  void write(const fs::path& dir) const {
    json in = json::object();
    for (const auto& [role, path] : inputs) {
      in[role] = {{"path", path.string()}, {"fnv1a64", fnv1a_file(path)}};
    }
    json doc = {{"tool", "persona"},
                {"version", kToolVersion},
                {"command", command},
                {"config", config},
                {"inputs", in},
                {"outputs", outputs}};
    doc["seed"] = seed ? json(*seed) : json(nullptr);
    write_json_file(dir / "manifest.json", doc);
  }
};

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  for (const auto& line : lines) out << line << '\n';
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path.string());
}

struct Runner {
  std::ostream& out;
  std::ostream& err;
  std::size_t threads = 1;
};

// ---- synth -----------------------------------------------------------------

struct SynthArgs {
  std::string spec;
  std::size_t n = 4000;
  std::uint64_t seed = 42;
  std::string out;
};

void run_synth(const SynthArgs& a, const CLI::App& sub, const Runner& r) {
  const SynthSpec spec = a.spec.empty() ? default_synth_spec()
                                        : synth_spec_from_json(read_json_file(a.spec));
  spec.validate();
  const fs::path dir(a.out);
  ensure_dir(dir);
  const SynthCorpus corpus = synth_corpus(spec, a.n, a.seed, r.threads);
  write_corpus(dir / "corpus.jsonl", corpus.docs);
  write_json_file(dir / "lexicon.json", lexicon_to_json(corpus.lexicon));
  write_json_file(dir / "spec.json", to_json(spec));
  Manifest m{"synth", resolved_options(sub), a.seed, {}, {"corpus.jsonl", "lexicon.json", "spec.json"}};
  if (!a.spec.empty()) m.inputs.emplace_back("spec", a.spec);
  m.write(dir);
  r.out << "wrote " << corpus.docs.size() << " documents to " << (dir / "corpus.jsonl").string()
        << "\n";
}

// ---- train-classifier --------------------------------------------------------

struct TrainClassifierArgs {
  std::string corpus;
  std::string out;
  std::string mode = "whitespace";
  std::uint64_t seed = 42;
  CnnConfig config;
};

void run_train_classifier(const TrainClassifierArgs& a, const CLI::App& sub, const Runner& r) {
  const auto docs = read_corpus(fs::path(a.corpus), parse_mode(a.mode));
  const fs::path dir(a.out);
  ensure_dir(dir);
  Rng rng(a.seed);
  const ClassifierTrainResult res = train_classifier(docs, a.config, rng);
  res.model.save(dir / "classifier.json");

  json history = json::array();
  for (const auto& e : res.history) {
    history.push_back({{"epoch", e.epoch},
                       {"train_loss", e.train_loss},
                       {"val_accuracy", trait_map(e.val_accuracy)},
                       {"mean_val_accuracy", e.mean_val_accuracy}});
  }
  write_json_file(dir / "metrics.json", {{"history", history},
                                         {"best_epoch", res.best_epoch},
                                         {"val_accuracy", trait_map(res.val_accuracy)},
                                         {"train_size", res.train_size},
                                         {"val_size", res.val_size}});
  Manifest{"train-classifier", resolved_options(sub), a.seed, {{"corpus", a.corpus}},
           {"classifier.json", "metrics.json"}}
      .write(dir);
  r.out << "best epoch " << res.best_epoch << ", validation accuracy";
  for (std::size_t d = 0; d < kNumTraits; ++d) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), " %s=%.4f", std::string(kTraitNames[d]).c_str(), res.val_accuracy[d]);
    r.out << buf;
  }
  r.out << "\n";
}

// ---- label -------------------------------------------------------------------

struct LabelArgs {
  std::string model;
  std::string in;
  std::string out;
  std::string mode = "whitespace";
};

constexpr double kUnkWarn = 0.1;
constexpr double kUnkFatal = 0.5;

void run_label(const LabelArgs& a, const CLI::App& sub, const Runner& r) {
  const CnnModel model = CnnModel::load(a.model);
  const auto docs = read_corpus(fs::path(a.in), parse_mode(a.mode));
  const double unk = unk_rate(docs, model.vocab());
  if (unk > kUnkFatal) {
    throw Error(ErrorKind::kValidation,
                "vocabulary mismatch: " + std::to_string(unk * 100) +
                    "% of input tokens are unknown to the classifier");
  }
  if (unk > kUnkWarn) {
    r.err << "persona: warning: " << unk * 100 << "% of input tokens are unknown to the classifier\n";
  }
  const fs::path dir(a.out);
  ensure_dir(dir);
  write_corpus(dir / "labeled.jsonl", label_corpus(docs, model, r.threads));
  Manifest{"label", resolved_options(sub), std::nullopt,
           {{"model", a.model}, {"corpus", a.in}}, {"labeled.jsonl"}}
      .write(dir);
  r.out << "labeled " << docs.size() << " documents\n";
}

// ---- train-generator ---------------------------------------------------------

struct TrainGeneratorArgs {
  std::string corpus;
  std::string out;
  std::string mode = "whitespace";
  std::uint64_t seed = 42;
  bool unconditional = false;
  LstmConfig config;
};

void run_train_generator(TrainGeneratorArgs a, const CLI::App& sub, const Runner& r) {
  const auto docs = read_corpus(fs::path(a.corpus), parse_mode(a.mode));
  a.config.cond_dim = a.unconditional ? 0 : kNumTraits;
  const fs::path dir(a.out);
  ensure_dir(dir);
  Rng rng(a.seed);
  const GeneratorTrainResult res = train_generator(docs, a.config, rng);
  res.model.save(dir / "generator.json");
  write_json_file(dir / "losses.json", {{"epoch_losses", res.epoch_losses}});
  Manifest{"train-generator", resolved_options(sub), a.seed, {{"corpus", a.corpus}},
           {"generator.json", "losses.json"}}
      .write(dir);
  r.out << "trained " << (a.unconditional ? "unconditional" : "conditional")
        << " generator; final epoch loss "
        << (res.epoch_losses.empty() ? 0.0 : res.epoch_losses.back()) << "\n";
}

// ---- generate ----------------------------------------------------------------

struct GenerateArgs {
  std::string model;
  std::string condition;
  std::size_t n = 1;
  std::string seed_pool;
  double temperature = 1.0;
  std::size_t max_len = 40;
  std::uint64_t seed = 42;
  std::string out;
};

void run_generate(const GenerateArgs& a, const CLI::App& sub, const Runner& r) {
  const LstmModel model = LstmModel::load(a.model);
  std::optional<TraitBits> condition;
  if (!a.condition.empty()) {
    condition = parse_condition(a.condition);
    if (!condition) {
      throw Error(ErrorKind::kConditionArity,
                  "malformed condition \"" + a.condition + "\": " + kConditionSyntax);
    }
  }
  if (model.config().conditional() && !condition) {
    throw Error(ErrorKind::kConditionArity,
                std::string("conditional model needs --condition: ") + kConditionSyntax);
  }
  if (!model.config().conditional() && condition) {
    throw Error(ErrorKind::kConditionArity, "unconditional model takes no --condition");
  }
  const auto pool = read_seed_pool(a.seed_pool);
  const GenerateOptions options{a.temperature, a.max_len};
  std::vector<std::string> lines(a.n);
  parallel_for(a.n, r.threads, [&](std::size_t i) {
    Rng rng = Rng::stream(a.seed, i);
    const Generation g = generate(model, condition, pool, options, rng);
    json j = {{"text", join_tokens(g.tokens)}, {"seed_word", g.seed_word}};
    j["condition"] = condition ? json(format_condition(*condition)) : json(nullptr);
    lines[i] = j.dump();
  });
  const fs::path dir(a.out);
  ensure_dir(dir);
  write_lines(dir / "texts.jsonl", lines);
  Manifest{"generate", resolved_options(sub), a.seed,
           {{"model", a.model}, {"seed_pool", a.seed_pool}}, {"texts.jsonl"}}
      .write(dir);
  r.out << "generated " << a.n << " texts\n";
}

// ---- score / calibrate -------------------------------------------------------

struct ScoreArgs {
  std::string lexicon;
  std::string in;
  std::string thresholds;
  bool levels = false;
  std::string out;
  std::string mode = "whitespace";
};

void run_score(const ScoreArgs& a, const CLI::App& sub, const Runner& r) {
  if (a.levels && a.thresholds.empty()) {
    throw Error(ErrorKind::kConfiguration, "--levels requires --thresholds");
  }
  const Lexicon lexicon = load_lexicon(fs::path(a.lexicon));
  std::optional<LevelThresholds> thresholds;
  if (!a.thresholds.empty()) thresholds = load_thresholds(a.thresholds);
  const auto docs = read_corpus(fs::path(a.in), parse_mode(a.mode));
  std::vector<std::string> lines(docs.size());
  parallel_for(docs.size(), r.threads, [&](std::size_t i) {
    const TraitScores s = score_tokens(docs[i].tokens, lexicon);
    json j = {{"text", docs[i].text}, {"scores", trait_map(s)}};
    if (thresholds) j["levels"] = level_map(assign_levels(s, *thresholds));
    lines[i] = j.dump();
  });
  const fs::path dir(a.out);
  ensure_dir(dir);
  write_lines(dir / "scores.jsonl", lines);
  Manifest m{"score", resolved_options(sub), std::nullopt,
             {{"lexicon", a.lexicon}, {"corpus", a.in}}, {"scores.jsonl"}};
  if (thresholds) m.inputs.emplace_back("thresholds", a.thresholds);
  m.write(dir);
  r.out << "scored " << docs.size() << " documents\n";
}

struct CalibrateArgs {
  std::string lexicon;
  std::string in;
  std::string out;
  std::string mode = "whitespace";
};

void run_calibrate(const CalibrateArgs& a, const CLI::App& sub, const Runner& r) {
  const Lexicon lexicon = load_lexicon(fs::path(a.lexicon));
  const auto docs = read_corpus(fs::path(a.in), parse_mode(a.mode));
  std::vector<TraitScores> scores(docs.size());
  parallel_for(docs.size(), r.threads,
               [&](std::size_t i) { scores[i] = score_tokens(docs[i].tokens, lexicon); });
  const LevelThresholds th = calibrate_thresholds(scores);
  const fs::path dir(a.out);
  ensure_dir(dir);
  write_json_file(dir / "thresholds.json", thresholds_to_json(th));
  Manifest{"calibrate", resolved_options(sub), std::nullopt,
           {{"lexicon", a.lexicon}, {"corpus", a.in}}, {"thresholds.json"}}
      .write(dir);
  r.out << "calibrated thresholds on " << docs.size() << " documents\n";
}

// ---- evaluate ----------------------------------------------------------------

struct EvaluateArgs {
  std::string model;
  std::string baseline;
  std::string lexicon;
  std::string thresholds;
  std::string seed_pool;
  std::size_t n_per_condition = 500;
  double temperature = kDefaultEvalTemperature;
  std::size_t max_len = 40;
  std::uint64_t seed = 42;
  bool samples = false;
  std::string out;
};

// True when at least one lexicon category can match some vocabulary token.
bool lexicon_overlaps(const Lexicon& lexicon, const Vocabulary& vocab) {
  for (TokenId id = Vocabulary::kNumSpecials; id < static_cast<TokenId>(vocab.size()); ++id) {
    const std::string tok = vocab.token_of(id);
    for (const auto& cat : lexicon.categories()) {
      if (cat.matches(tok)) return true;
    }
  }
  return false;
}

void run_evaluate(const EvaluateArgs& a, const CLI::App& sub, const Runner& r) {
  const LstmModel model = LstmModel::load(a.model);
  std::optional<LstmModel> baseline;
  if (!a.baseline.empty()) baseline = LstmModel::load(a.baseline);
  const Lexicon lexicon = load_lexicon(fs::path(a.lexicon));
  const LevelThresholds thresholds = load_thresholds(a.thresholds);
  const auto pool = read_seed_pool(a.seed_pool);
  if (!lexicon_overlaps(lexicon, model.vocab())) {
    throw Error(ErrorKind::kValidation,
                "vocabulary mismatch: no lexicon entry matches any generator token");
  }
  if (baseline && baseline->vocab() != model.vocab()) {
    throw Error(ErrorKind::kValidation,
                "vocabulary mismatch: baseline and conditional generators differ");
  }
  EvalOptions options;
  options.n_per_condition = a.n_per_condition;
  options.temperature = a.temperature;
  options.max_len = a.max_len;
  options.seed = a.seed;
  options.threads = r.threads;
  options.unconditional_row = baseline.has_value();
  std::vector<EvalSample> samples;
  const EvalReport report =
      evaluate_generation(model, baseline ? &*baseline : nullptr, lexicon, thresholds, pool,
                          options, a.samples ? &samples : nullptr);
  const fs::path dir(a.out);
  ensure_dir(dir);
  write_json_file(dir / "report.json", report_to_json(report));
  const std::string table = render_table(report);
  write_text_file(dir / "table.txt", table);
  std::vector<std::string> outputs{"report.json", "table.txt"};
  if (a.samples) {
    std::vector<std::string> lines;
    lines.reserve(samples.size());
    for (const auto& s : samples) {
      json j = {{"group", s.group},
                {"text", join_tokens(s.generation.tokens)},
                {"seed_word", s.generation.seed_word},
                {"scores", trait_map(s.scores)},
                {"levels", level_map(s.levels)}};
      j["condition"] = s.condition ? json(format_condition(*s.condition)) : json(nullptr);
      lines.push_back(j.dump());
    }
    write_lines(dir / "samples.jsonl", lines);
    outputs.push_back("samples.jsonl");
  }
  Manifest m{"evaluate", resolved_options(sub), a.seed,
             {{"model", a.model}, {"lexicon", a.lexicon}, {"thresholds", a.thresholds},
              {"seed_pool", a.seed_pool}},
             outputs};
  if (baseline) m.inputs.emplace_back("baseline", a.baseline);
  m.write(dir);
  r.out << table;
}

void add_mode_option(CLI::App* sub, std::string& mode) {
  sub->add_option("--mode", mode, "Tokenization: whitespace or cjk_char")
      ->check(CLI::IsMember({"whitespace", "cjk_char"}));
}

void add_vocab_options(CLI::App* sub, std::size_t& min_count, std::size_t& max_vocab) {
  sub->add_option("--min-count", min_count, "Minimum token count for the vocabulary")
      ->check(CLI::PositiveNumber);
  sub->add_option("--max-vocab", max_vocab, "Vocabulary size cap including specials")
      ->check(CLI::Range(4, 10000000));
}

}  // namespace

std::string fnv1a_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

std::vector<std::string> read_seed_pool(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read seed pool " + path.string());
  std::vector<std::string> pool;
  std::string line;
  while (std::getline(in, line)) {
    const auto toks = tokenize(line, TokenizeMode::kWhitespace);
    if (toks.size() > 1) {
      throw Error(ErrorKind::kSeedPool, "seed pool lines must hold one token: " + line);
    }
    if (!toks.empty()) pool.push_back(toks[0]);
  }
  return pool;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Personality-conditioned short-text generation toolkit", "persona"};
  app.option_defaults()->always_capture_default();
  app.set_version_flag("--version", kToolVersion);
  app.set_config("--config", "", "Config file with one [section] per subcommand; flags win");
  Runner runner{out, err};
  app.add_option("--threads", runner.threads, "Worker cap; never changes outputs")
      ->check(CLI::PositiveNumber);
  app.require_subcommand(1);
  app.fallthrough();

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a planted-signal corpus and its lexicon");
  s->add_option("--spec", synth.spec, "Synthetic spec JSON (default spec if omitted)");
  s->add_option("--n", synth.n, "Number of documents");
  s->add_option("--seed", synth.seed, "Master seed");
  s->add_option("--out", synth.out, "Output directory")->required();

  TrainClassifierArgs tc;
  auto* c = app.add_subcommand("train-classifier", "Train the CNN trait classifier");
  c->add_option("--corpus", tc.corpus, "Labeled corpus JSONL")->required();
  c->add_option("--out", tc.out, "Output directory")->required();
  c->add_option("--seed", tc.seed, "Master seed");
  add_mode_option(c, tc.mode);
  c->add_option("--epochs", tc.config.epochs, "Training epochs");
  c->add_option("--embed-dim", tc.config.embed_dim, "Embedding width");
  c->add_option("--window", tc.config.window, "Convolution window");
  c->add_option("--filters", tc.config.num_filters, "Number of filters");
  c->add_option("--max-len", tc.config.max_len, "Encoded length incl. BOS/EOS");
  c->add_option("--batch-size", tc.config.batch_size, "Minibatch size");
  c->add_option("--lr", tc.config.learning_rate, "Adam learning rate");
  c->add_option("--max-grad-norm", tc.config.max_grad_norm, "Global-norm clip");
  add_vocab_options(c, tc.config.min_count, tc.config.max_vocab);

  LabelArgs label;
  auto* l = app.add_subcommand("label", "Label a corpus with a trained classifier");
  l->add_option("--model", label.model, "Classifier checkpoint")->required();
  l->add_option("--in", label.in, "Input corpus JSONL")->required();
  l->add_option("--out", label.out, "Output directory")->required();
  add_mode_option(l, label.mode);

  TrainGeneratorArgs tg;
  auto* g = app.add_subcommand("train-generator", "Train the LSTM generator");
  g->add_option("--corpus", tg.corpus, "Corpus JSONL (labeled unless --unconditional)")
      ->required();
  g->add_option("--out", tg.out, "Output directory")->required();
  g->add_option("--seed", tg.seed, "Master seed");
  g->add_flag("--unconditional", tg.unconditional, "Train the baseline without conditions");
  add_mode_option(g, tg.mode);
  g->add_option("--epochs", tg.config.epochs, "Training epochs");
  g->add_option("--embed-dim", tg.config.embed_dim, "Embedding width");
  g->add_option("--hidden-dim", tg.config.hidden_dim, "LSTM state width");
  g->add_option("--max-len", tg.config.max_len, "Encoded length incl. BOS/EOS");
  g->add_option("--batch-size", tg.config.batch_size, "Minibatch size");
  g->add_option("--lr", tg.config.learning_rate, "Adam learning rate");
  g->add_option("--max-grad-norm", tg.config.max_grad_norm, "Global-norm clip");
  add_vocab_options(g, tg.config.min_count, tg.config.max_vocab);

  GenerateArgs gen;
  auto* ge = app.add_subcommand("generate", "Sample texts from a generator");
  ge->add_option("--model", gen.model, "Generator checkpoint")->required();
  ge->add_option("--condition", gen.condition, "e.g. E=1,A=0,C=1,N=0,O=1");
  ge->add_option("--n", gen.n, "Number of texts");
  ge->add_option("--seed-pool", gen.seed_pool, "Seed words, one per line")->required();
  ge->add_option("--temperature", gen.temperature, "Sampling temperature; 0 is greedy")
      ->check(CLI::NonNegativeNumber);
  ge->add_option("--max-len", gen.max_len, "Maximum emitted tokens")->check(CLI::PositiveNumber);
  ge->add_option("--seed", gen.seed, "Master seed");
  ge->add_option("--out", gen.out, "Output directory")->required();

  ScoreArgs score;
  auto* sc = app.add_subcommand("score", "Score texts with a lexicon");
  sc->add_option("--lexicon", score.lexicon, "Lexicon JSON")->required();
  sc->add_option("--in", score.in, "Corpus JSONL")->required();
  sc->add_option("--thresholds", score.thresholds, "Thresholds JSON; adds levels");
  sc->add_flag("--levels", score.levels, "Require levels (needs --thresholds)");
  sc->add_option("--out", score.out, "Output directory")->required();
  add_mode_option(sc, score.mode);

  CalibrateArgs cal;
  auto* ca = app.add_subcommand("calibrate", "Calibrate tertile thresholds on a corpus");
  ca->add_option("--lexicon", cal.lexicon, "Lexicon JSON")->required();
  ca->add_option("--in", cal.in, "Reference corpus JSONL")->required();
  ca->add_option("--out", cal.out, "Output directory")->required();
  add_mode_option(ca, cal.mode);

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "Tabulate generated trait levels per condition");
  e->add_option("--model", ev.model, "Conditional generator checkpoint")->required();
  e->add_option("--baseline", ev.baseline, "Unconditional generator checkpoint");
  e->add_option("--lexicon", ev.lexicon, "Lexicon JSON")->required();
  e->add_option("--thresholds", ev.thresholds, "Thresholds JSON")->required();
  e->add_option("--seed-pool", ev.seed_pool, "Seed words, one per line")->required();
  e->add_option("--n-per-condition", ev.n_per_condition, "Texts per condition")
      ->check(CLI::PositiveNumber);
  e->add_option("--temperature", ev.temperature, "Sampling temperature; 0 is greedy")
      ->check(CLI::NonNegativeNumber);
  e->add_option("--max-len", ev.max_len, "Maximum emitted tokens")->check(CLI::PositiveNumber);
  e->add_option("--seed", ev.seed, "Master seed");
  e->add_flag("--samples", ev.samples, "Also write every generated text");
  e->add_option("--out", ev.out, "Output directory")->required();

  auto fail = [&](std::string_view kind, const std::string& msg, int code) {
    std::string line = msg;
    std::replace(line.begin(), line.end(), '\n', ' ');
    err << "persona: error[" << kind << "]: " << line << "\n";
    return code;
  };

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    return fail("usage", ex.what(), kExitUser);
  }

  try {
    if (*s) run_synth(synth, *s, runner);
    else if (*c) run_train_classifier(tc, *c, runner);
    else if (*l) run_label(label, *l, runner);
    else if (*g) run_train_generator(tg, *g, runner);
    else if (*ge) run_generate(gen, *ge, runner);
    else if (*sc) run_score(score, *sc, runner);
    else if (*ca) run_calibrate(cal, *ca, runner);
    else if (*e) run_evaluate(ev, *e, runner);
  } catch (const Error& ex) {
    return fail(error_kind_name(ex.kind()), ex.what(),
                is_user_error(ex.kind()) ? kExitUser : kExitInternal);
  } catch (const std::exception& ex) {
    return fail("internal", ex.what(), kExitInternal);
  }
  return kExitOk;
}

}  // namespace persona
