// SPDX-License-Identifier: Apache-2.0
/**
 * @file   corpus.hpp
 * @brief  Paragraph corpus I/O, vocabulary construction, sentence encoding,
 *         train/test splitting and extraction of (context, next sentence)
 *         training pairs.
 *
 * Corpus text format: UTF-8, one sentence per line, tokens separated by
 * spaces, paragraphs separated by one or more blank lines.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hrseq {

using TokenId = std::size_t;
using TokenSeq = std::vector<TokenId>;
using Sentence = std::vector<std::string>;

struct Paragraph {
  std::vector<Sentence> sentences;
  friend bool operator==(const Paragraph&, const Paragraph&) = default;
};

enum class Tokenizer { Whitespace, Character };

struct CorpusOptions {
  std::size_t max_sentence_len = 20;
  Tokenizer tokenizer = Tokenizer::Whitespace;
};

/// Error raised on undecodable corpus input; carries the 1-based line number.
class CorpusError : public std::runtime_error {
 public:
  CorpusError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

Sentence tokenize(std::string_view line, Tokenizer tokenizer);

/// Parses the paragraph text format. Sentences longer than
/// options.max_sentence_len are dropped; paragraphs left empty are dropped.
std::vector<Paragraph> load_corpus(std::istream& in, const CorpusOptions& options = {});
std::vector<Paragraph> load_corpus_file(const std::string& path,
                                        const CorpusOptions& options = {});

void write_corpus(std::ostream& out, const std::vector<Paragraph>& paragraphs);
void write_corpus_file(const std::string& path, const std::vector<Paragraph>& paragraphs);

class Vocabulary {
 public:
  static constexpr TokenId kUnk = 0;
  static constexpr TokenId kGo = 1;
  static constexpr TokenId kEos = 2;
  static constexpr std::size_t kReserved = 3;
  static constexpr std::string_view kUnkSymbol = "<unk>";
  static constexpr std::string_view kGoSymbol = "<go>";
  static constexpr std::string_view kEosSymbol = "<eos>";

  /// Reserved symbols only.
  Vocabulary();

  /// Keeps every token seen at least min_count times. Ids ascend with
  /// descending frequency; equal frequencies are ordered lexicographically.
  static Vocabulary build(const std::vector<Paragraph>& paragraphs, std::size_t min_count);

  /// Inverse of save(): one token per line, line index = id.
  static Vocabulary load(std::istream& in);
  static Vocabulary load_file(const std::string& path);
  void save(std::ostream& out) const;
  void save_file(const std::string& path) const;

  std::size_t size() const { return tokens_.size(); }
  bool contains(std::string_view token) const;
  /// Id of token, or kUnk when it is not in the vocabulary.
  TokenId id(std::string_view token) const;
  const std::string& token(TokenId id) const;
  /// Corpus count recorded at build time (0 for reserved ids and loaded vocabularies).
  std::size_t frequency(TokenId id) const;

  /// (go, ids..., eos); unknown tokens map to unk.
  TokenSeq encode(const Sentence& sentence) const;
  /// Maps ids back to tokens, dropping go/eos framing.
  Sentence decode(const TokenSeq& ids) const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  void add(std::string token, std::size_t frequency);

  std::vector<std::string> tokens_;
  std::vector<std::size_t> frequencies_;
  std::unordered_map<std::string, TokenId> index_;
};

/// Raw token counts over every sentence of every paragraph.
std::map<std::string, std::size_t> count_tokens(const std::vector<Paragraph>& paragraphs);

struct CorpusSplit {
  std::vector<Paragraph> train;
  std::vector<Paragraph> test;
};

/// Seeded shuffle, then the first round(train_fraction·N) paragraphs train.
CorpusSplit split_corpus(const std::vector<Paragraph>& paragraphs, double train_fraction,
                         std::uint64_t seed);

struct TrainingExample {
  std::vector<TokenSeq> context;  // oldest first, each framed go..eos
  TokenSeq target;                // framed go..eos
};

/// Half-open [first, last) range of sentence indices forming the context of
/// the sentence at 0-based index `target`.
struct ContextWindow {
  std::size_t first = 0;
  std::size_t last = 0;
};
ContextWindow context_window(std::size_t target, std::size_t num_window);

/// One example per sentence after the first; each context holds the up-to
/// num_window sentences immediately before the target.
std::vector<TrainingExample> make_training_examples(const Paragraph& paragraph,
                                                    std::size_t num_window,
                                                    const Vocabulary& vocab);
std::vector<TrainingExample> make_training_examples(const std::vector<Paragraph>& paragraphs,
                                                    std::size_t num_window,
                                                    const Vocabulary& vocab);

}  // namespace hrseq
