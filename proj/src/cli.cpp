// SPDX-License-Identifier: Apache-2.0
#include "hrseq/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hrseq/checkpoint.hpp"
#include "hrseq/corpus.hpp"
#include "hrseq/evaluate.hpp"
#include "hrseq/inference.hpp"
#include "hrseq/random.hpp"
#include "hrseq/synthetic.hpp"
#include "hrseq/trainer.hpp"

namespace hrseq::cli {

namespace {

namespace fs = std::filesystem;

/// Error raised by a subcommand; reported as "error: <what>".
class CommandError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const std::map<std::string, Tokenizer> kTokenizers{{"whitespace", Tokenizer::Whitespace},
                                                   {"character", Tokenizer::Character}};
const std::map<std::string, Variant> kVariants{{"seq2seq", Variant::Seq2Seq},
                                               {"hred", Variant::Hred},
                                               {"hred_attention", Variant::HredAttention}};

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CommandError("cannot write '" + path + "'");
  return out;
}

/// Reads `key = value` lines into "--key=value" arguments. Blank lines and
/// lines starting with '#' are skipped; underscores in keys become dashes.
std::vector<std::string> config_arguments(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CommandError("cannot open config file '" + path + "'");
  std::vector<std::string> args;
  std::string line;
  std::size_t number = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++number;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw CommandError(path + ":" + std::to_string(number) + ": expected 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front()) {
      value = value.substr(1, value.size() - 2);
    }
    for (char& c : key) {
      if (c == '_') c = '-';
    }
    if (key.empty() || key == "config") {
      throw CommandError(path + ":" + std::to_string(number) + ": invalid key '" + key + "'");
    }
    args.push_back("--" + key + "=" + value);
  }
  return args;
}

/// Inserts config-file arguments right after the subcommand name so that
/// flags given on the command line, which come later, take precedence.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::optional<std::string> config;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) config = args[i].substr(9);
  }
  if (!config || args.size() < 2) return args;
  std::vector<std::string> out{args[0], args[1]};
  for (auto& a : config_arguments(*config)) out.push_back(std::move(a));
  out.insert(out.end(), args.begin() + 2, args.end());
  return out;
}

// --- shared option groups ------------------------------------------------------

struct CorpusFlags {
  std::size_t max_sentence_len = 20;
  std::string tokenizer = "whitespace";

  void add(CLI::App& app) {
    app.add_option("--max-sentence-len", max_sentence_len, "Drop sentences longer than this")
        ->check(CLI::PositiveNumber);
    app.add_option("--tokenizer", tokenizer, "Split sentences on whitespace or into characters")
        ->check(CLI::IsMember({"whitespace", "character"}));
  }
  CorpusOptions options() const { return {max_sentence_len, kTokenizers.at(tokenizer)}; }
};

struct InferenceFlags {
  InferenceConfig cfg;
  std::size_t num_window = 5;
  CLI::Option* num_window_opt = nullptr;

  void add(CLI::App& app) {
    app.add_option("--beam-width", cfg.beam_width, "Beam width k")->check(CLI::PositiveNumber);
    app.add_option("--max-decode-len", cfg.max_decode_len, "Token cap per sentence, eos included")
        ->check(CLI::PositiveNumber);
    app.add_option("--length-norm", cfg.length_norm_alpha, "Length normalisation exponent alpha");
    num_window_opt = app.add_option("--num-window", num_window,
                                    "Context sentences (default: the checkpoint's value)")
                         ->check(CLI::PositiveNumber);
  }
  std::size_t window(const Checkpoint& ck) const {
    return num_window_opt->count() ? num_window : ck.train_config.num_window;
  }
};

void check_vocab_matches(const Vocabulary& vocab, const Checkpoint& ck) {
  if (vocab.size() != ck.params.config.vocab_size) {
    throw CommandError("vocabulary has " + std::to_string(vocab.size()) +
                       " entries but the checkpoint expects " +
                       std::to_string(ck.params.config.vocab_size));
  }
}

// --- preprocess -------------------------------------------------------------------

struct PreprocessCommand {
  std::string corpus;
  std::string out_dir;
  std::size_t min_count = 10;
  double train_fraction = 0.9;
  std::uint64_t seed = 1;
  CorpusFlags corpus_flags;

  void add(CLI::App& parent) {
    CLI::App* app = parent.add_subcommand("preprocess", "Build the vocabulary and the train/test split");
    app->add_option("--corpus", corpus, "Raw corpus (one sentence per line, blank line between paragraphs)")
        ->required()->check(CLI::ExistingFile);
    app->add_option("--out", out_dir, "Output directory for vocab.txt, train.txt and test.txt")->required();
    app->add_option("--min-count", min_count, "Minimum token frequency kept in the vocabulary")
        ->check(CLI::PositiveNumber);
    app->add_option("--train-fraction", train_fraction, "Fraction of paragraphs used for training")
        ->check(CLI::Range(0.0, 1.0));
    app->add_option("--rng-seed", seed, "Seed of the split shuffle");
    corpus_flags.add(*app);
  }

  int run(std::ostream& out) const {
    const auto paragraphs = load_corpus_file(corpus, corpus_flags.options());
    if (paragraphs.size() < 2) throw CommandError("corpus needs at least two paragraphs to split");
    const Vocabulary vocab = Vocabulary::build(paragraphs, min_count);
    const CorpusSplit split = split_corpus(paragraphs, train_fraction, seed);
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    vocab.save_file((dir / "vocab.txt").string());
    write_corpus_file((dir / "train.txt").string(), split.train);
    write_corpus_file((dir / "test.txt").string(), split.test);
    out << "paragraphs\t" << paragraphs.size() << "\n"
        << "distinct_tokens\t" << count_tokens(paragraphs).size() << "\n"
        << "vocab_size\t" << vocab.size() << "\n"
        << "train_paragraphs\t" << split.train.size() << "\n"
        << "test_paragraphs\t" << split.test.size() << "\n";
    return 0;
  }
};

// --- train --------------------------------------------------------------------------

struct TrainCommand {
  std::string corpus;
  std::string valid;
  std::string vocab_path;
  std::string checkpoint;
  std::string resume;
  std::string log_path;
  std::string preset = "full";
  std::string variant = "hred_attention";
  TrainConfig cfg;
  CorpusFlags corpus_flags;
  std::vector<std::pair<CLI::Option*, std::size_t TrainConfig::*>> desk_overridable;
  CLI::Option* batch_opt = nullptr;

  void add(CLI::App& parent) {
    CLI::App* app = parent.add_subcommand("train", "Train a model and write its best checkpoint");
    app->add_option("--corpus", corpus, "Training paragraphs")->required()->check(CLI::ExistingFile);
    app->add_option("--valid", valid, "Held-out paragraphs for early stopping (default: training loss)")
        ->check(CLI::ExistingFile);
    app->add_option("--vocab", vocab_path, "Vocabulary file")->required()->check(CLI::ExistingFile);
    app->add_option("--checkpoint", checkpoint, "Checkpoint to write")->required();
    app->add_option("--resume", resume, "Continue from this checkpoint")->check(CLI::ExistingFile);
    app->add_option("--out", log_path, "Per-epoch loss log (tab separated)");
    app->add_option("--variant", variant, "Model variant")
        ->check(CLI::IsMember({"seq2seq", "hred", "hred_attention"}));
    app->add_option("--preset", preset, "Size preset; explicit size flags override it")
        ->check(CLI::IsMember({"full", "desk"}));
    auto dim = [&](const char* flag, std::size_t TrainConfig::*field, const char* help) {
      desk_overridable.emplace_back(app->add_option(flag, cfg.*field, help)->check(CLI::PositiveNumber), field);
    };
    dim("--embed-dim", &TrainConfig::embed_dim, "Word embedding size");
    dim("--word-hidden", &TrainConfig::word_hidden, "Word-level GRU size");
    dim("--word-layers", &TrainConfig::word_layers, "Word-level GRU layers");
    dim("--sent-hidden", &TrainConfig::sent_hidden, "Sentence-level GRU size");
    dim("--dec-hidden", &TrainConfig::dec_hidden, "Decoder GRU size (must equal --sent-hidden)");
    app->add_option("--attn-dim", cfg.attn_dim, "Attention layer size (0: decoder size)");
    app->add_option("--num-window", cfg.num_window, "Context sentences per target")->check(CLI::PositiveNumber);
    batch_opt = app->add_option("--batch-size", cfg.batch_size, "Mini-batch size")->check(CLI::PositiveNumber);
    app->add_option("--init-range", cfg.init_range, "Uniform initialisation half-width");
    app->add_option("--lr", cfg.adam.lr, "Adam learning rate");
    app->add_option("--beta1", cfg.adam.beta1, "Adam beta1");
    app->add_option("--beta2", cfg.adam.beta2, "Adam beta2");
    app->add_option("--adam-epsilon", cfg.adam.epsilon, "Adam epsilon");
    app->add_option("--clip-norm", cfg.clip_norm, "Global gradient norm cap (0: off)");
    app->add_option("--patience", cfg.patience, "Epochs without improvement before stopping")
        ->check(CLI::PositiveNumber);
    app->add_option("--max-epochs", cfg.max_epochs, "Epoch limit")->check(CLI::PositiveNumber);
    app->add_option("--rng-seed", cfg.seed, "Seed for initialisation and shuffling");
    app->add_option("--threads", cfg.threads, "Worker threads for gradients")->check(CLI::PositiveNumber);
    corpus_flags.add(*app);
  }

  void apply_preset() {
    if (preset != "desk") return;
    const TrainConfig desk = TrainConfig::desk();
    for (auto& [opt, field] : desk_overridable) {
      if (!opt->count()) cfg.*field = desk.*field;
    }
    if (!batch_opt->count()) cfg.batch_size = desk.batch_size;
  }

  int run(std::ostream& out, std::ostream& err) {
    apply_preset();
    const Vocabulary vocab = Vocabulary::load_file(vocab_path);
    const auto train_paragraphs = load_corpus_file(corpus, corpus_flags.options());
    const auto train_set = make_training_examples(train_paragraphs, cfg.num_window, vocab);
    if (train_set.empty()) throw CommandError("training corpus yields no examples");
    std::vector<TrainingExample> valid_set;
    if (!valid.empty()) {
      valid_set = make_training_examples(load_corpus_file(valid, corpus_flags.options()), cfg.num_window, vocab);
    }

    std::ofstream log;
    if (!log_path.empty()) {
      log = open_output(log_path);
      log << "epoch\ttrain_loss\tvalid_loss\n";
    }
    TrainHooks hooks;
    hooks.on_epoch = [&](std::size_t epoch, const EpochRecord& r) {
      err << "epoch " << epoch << "  train " << r.train_loss << "  valid " << r.valid_loss << "\n";
      if (log) log << epoch << "\t" << format_double(r.train_loss) << "\t" << format_double(r.valid_loss) << "\n";
    };

    Checkpoint best;
    if (!resume.empty()) {
      Checkpoint start = load_checkpoint_file(resume);
      check_vocab_matches(vocab, start);
      best = train(cfg, std::move(start), train_set, valid_set, hooks);
    } else {
      best = train(cfg, cfg.model_config(kVariants.at(variant), vocab.size()), train_set, valid_set, hooks);
    }
    save_checkpoint_file(checkpoint, best);
    out << "best_epoch\t" << best.epoch << "\n"
        << "epochs_run\t" << best.history.size() << "\n"
        << "parameters\t" << best.params.parameter_count() << "\n";
    return 0;
  }
};

// --- generate -----------------------------------------------------------------------

struct GenerateCommand {
  std::string checkpoint;
  std::string vocab_path;
  std::string seed_text;
  std::string out_path;
  std::size_t sentences = 5;
  InferenceFlags inference;
  std::string tokenizer = "whitespace";

  void add(CLI::App& parent) {
    CLI::App* app = parent.add_subcommand("generate", "Continue a paragraph from a seed sentence");
    app->add_option("--checkpoint", checkpoint, "Trained checkpoint")->required()->check(CLI::ExistingFile);
    app->add_option("--vocab", vocab_path, "Vocabulary file")->required()->check(CLI::ExistingFile);
    app->add_option("--seed-text", seed_text, "First sentence of the paragraph")->required();
    app->add_option("--sentences", sentences, "Sentences to generate after the seed");
    app->add_option("--out", out_path, "Write the paragraph here instead of standard output");
    app->add_option("--tokenizer", tokenizer, "Split the seed on whitespace or into characters")
        ->check(CLI::IsMember({"whitespace", "character"}));
    inference.add(*app);
  }

  int run(std::ostream& out) const {
    const Checkpoint ck = load_checkpoint_file(checkpoint);
    const Vocabulary vocab = Vocabulary::load_file(vocab_path);
    check_vocab_matches(vocab, ck);
    const Sentence seed = tokenize(seed_text, kTokenizers.at(tokenizer));
    if (seed.empty()) throw CommandError("--seed-text is empty");
    const Paragraph paragraph =
        generate_paragraph(ck.params, vocab, seed, sentences, inference.window(ck), inference.cfg);
    if (out_path.empty()) {
      write_corpus(out, {paragraph});
    } else {
      write_corpus_file(out_path, {paragraph});
    }
    return 0;
  }
};

// --- evaluate -----------------------------------------------------------------------

struct EvaluateCommand {
  std::string checkpoint;
  std::string vocab_path;
  std::string corpus;
  std::string out_path;
  std::string generations_path;
  InferenceFlags inference;
  CorpusFlags corpus_flags;

  void add(CLI::App& parent) {
    CLI::App* app = parent.add_subcommand("evaluate", "Corpus BLEU of beam-decoded next sentences");
    app->add_option("--checkpoint", checkpoint, "Trained checkpoint")->required()->check(CLI::ExistingFile);
    app->add_option("--vocab", vocab_path, "Vocabulary file")->required()->check(CLI::ExistingFile);
    app->add_option("--corpus", corpus, "Test paragraphs")->required()->check(CLI::ExistingFile);
    app->add_option("--out", out_path, "Report file (default: standard output)");
    app->add_option("--generations", generations_path, "Write decoded sentences here, one paragraph per test paragraph");
    inference.add(*app);
    corpus_flags.add(*app);
  }

  int run(std::ostream& out) const {
    const Checkpoint ck = load_checkpoint_file(checkpoint);
    const Vocabulary vocab = Vocabulary::load_file(vocab_path);
    check_vocab_matches(vocab, ck);
    const auto paragraphs = load_corpus_file(corpus, corpus_flags.options());
    const std::size_t window = inference.window(ck);

    std::vector<TrainingExample> examples;
    std::vector<std::size_t> per_paragraph;
    for (const Paragraph& p : paragraphs) {
      auto ex = make_training_examples(p, window, vocab);
      per_paragraph.push_back(ex.size());
      examples.insert(examples.end(), ex.begin(), ex.end());
    }
    if (examples.empty()) throw CommandError("test corpus yields no examples");
    const Evaluation evaluation = evaluate_model(ck.params, examples, inference.cfg);

    if (out_path.empty()) {
      write_evaluation_report(out, evaluation);
    } else {
      std::ofstream report = open_output(out_path);
      write_evaluation_report(report, evaluation);
    }
    if (!generations_path.empty()) {
      std::vector<Paragraph> generated;
      std::size_t next = 0;
      for (std::size_t count : per_paragraph) {
        if (count == 0) continue;
        Paragraph p;
        for (std::size_t i = 0; i < count; ++i) p.sentences.push_back(vocab.decode(evaluation.predictions[next++]));
        generated.push_back(std::move(p));
      }
      write_corpus_file(generations_path, generated);
    }
    return 0;
  }
};

// --- gradcheck ----------------------------------------------------------------------

struct GradcheckCommand {
  std::string variant_name = "all";
  std::size_t vocab_size = 20;
  std::size_t examples = 2;
  std::size_t context = 3;
  double epsilon = 1e-5;
  double tolerance = 1e-4;
  std::uint64_t seed = 1;
  TrainConfig cfg = TrainConfig::desk();

  void add(CLI::App& parent) {
    CLI::App* app = parent.add_subcommand("gradcheck", "Compare analytic and finite-difference gradients");
    app->add_option("--variant", variant_name, "Variant to check, or 'all'")
        ->check(CLI::IsMember({"all", "seq2seq", "hred", "hred_attention"}));
    app->add_option("--vocab-size", vocab_size, "Vocabulary size, reserved symbols included")
        ->check(CLI::Range(std::size_t{4}, std::size_t{1000}));
    app->add_option("--examples", examples, "Random examples in the loss")->check(CLI::PositiveNumber);
    app->add_option("--context", context, "Context sentences per example")->check(CLI::PositiveNumber);
    app->add_option("--embed-dim", cfg.embed_dim, "Word embedding size")->check(CLI::PositiveNumber);
    app->add_option("--word-hidden", cfg.word_hidden, "Word-level GRU size")->check(CLI::PositiveNumber);
    app->add_option("--word-layers", cfg.word_layers, "Word-level GRU layers")->check(CLI::PositiveNumber);
    app->add_option("--sent-hidden", cfg.sent_hidden, "Sentence-level and decoder GRU size")
        ->check(CLI::PositiveNumber);
    app->add_option("--init-range", cfg.init_range, "Uniform initialisation half-width");
    app->add_option("--epsilon", epsilon, "Central-difference step")->check(CLI::PositiveNumber);
    app->add_option("--tolerance", tolerance, "Largest accepted relative error");
    app->add_option("--rng-seed", seed, "Seed for parameters and examples");
  }

  int run(std::ostream& out) {
    cfg.dec_hidden = cfg.sent_hidden;
    std::vector<Variant> variants;
    if (variant_name == "all") {
      variants = {Variant::Seq2Seq, Variant::Hred, Variant::HredAttention};
    } else {
      variants = {kVariants.at(variant_name)};
    }
    bool all_passed = true;
    for (Variant v : variants) {
      const ModelParams params = init_params(cfg.model_config(v, vocab_size), cfg.init_range, seed);
      Rng rng(seed + 1);
      std::vector<TrainingExample> batch;
      auto sentence = [&] {
        TokenSeq s{Vocabulary::kGo};
        const std::size_t len = 1 + rng.below(5);
        for (std::size_t i = 0; i < len; ++i) s.push_back(Vocabulary::kReserved + rng.below(vocab_size - 3));
        s.push_back(Vocabulary::kEos);
        return s;
      };
      for (std::size_t e = 0; e < examples; ++e) {
        TrainingExample ex;
        for (std::size_t k = 0; k < context; ++k) ex.context.push_back(sentence());
        ex.target = sentence();
        batch.push_back(std::move(ex));
      }
      const GradientCheckReport report = gradient_check(params, batch, epsilon);
      const bool passed = report.passed(tolerance);
      all_passed = all_passed && passed;
      out << to_string(v) << "\t" << (passed ? "PASS" : "FAIL") << "\tmax_relative_error\t"
          << report.max_relative_error << "\tparameters\t" << params.parameter_count() << "\n";
      for (const TensorCheck& t : report.tensors) {
        out << "  " << t.name << "\t" << t.size << "\t" << t.max_relative_error << "\n";
      }
    }
    return all_passed ? 0 : 1;
  }
};

// --- synth --------------------------------------------------------------------------

struct SynthCommand {
  std::string kind = "long-range";
  std::string out_path;
  std::size_t paragraphs = 200;
  std::uint64_t seed = 1;

  void add(CLI::App& parent) {
    CLI::App* app = parent.add_subcommand("synth", "Write a synthetic corpus with known sentence dependencies");
    app->add_option("--kind", kind, "successor: S_m depends on S_m-1; long-range: also on S_m-3")
        ->check(CLI::IsMember({"successor", "long-range"}));
    app->add_option("--out", out_path, "Corpus file to write")->required();
    app->add_option("--paragraphs", paragraphs, "Number of paragraphs")->check(CLI::PositiveNumber);
    app->add_option("--rng-seed", seed, "Generator seed");
  }

  int run() const {
    std::vector<Paragraph> corpus;
    if (kind == "successor") {
      SuccessorCorpusOptions o;
      o.paragraphs = paragraphs;
      corpus = successor_corpus(o, seed);
    } else {
      LongRangeCorpusOptions o;
      o.paragraphs = paragraphs;
      corpus = long_range_corpus(o, seed);
    }
    write_corpus_file(out_path, corpus);
    return 0;
  }
};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hierarchical encoder-decoder for next-sentence generation", "hrseq"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  PreprocessCommand preprocess;
  TrainCommand train_cmd;
  GenerateCommand generate;
  EvaluateCommand evaluate;
  GradcheckCommand gradcheck;
  SynthCommand synth;
  preprocess.add(app);
  train_cmd.add(app);
  generate.add(app);
  evaluate.add(app);
  gradcheck.add(app);
  synth.add(app);
  // Read before parsing by expand_config; declared so parsing accepts it.
  std::string config_path;
  for (CLI::App* sub : app.get_subcommands({})) {
    sub->add_option("--config", config_path, "File of 'key = value' lines; command-line flags win");
  }

  try {
    std::vector<std::string> args(argv, argv + argc);
    args = expand_config(args);
    std::vector<const char*> raw;
    for (const auto& a : args) raw.push_back(a.c_str());
    try {
      app.parse(static_cast<int>(raw.size()), raw.data());
    } catch (const CLI::ParseError& e) {
      return app.exit(e, out, err);
    }

    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "preprocess") return preprocess.run(out);
    if (name == "train") return train_cmd.run(out, err);
    if (name == "generate") return generate.run(out);
    if (name == "evaluate") return evaluate.run(out);
    if (name == "gradcheck") return gradcheck.run(out);
    if (name == "synth") return synth.run();
    err << "error: unknown subcommand '" << name << "'\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace hrseq::cli
