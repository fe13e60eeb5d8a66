// SPDX-License-Identifier: Apache-2.0
#include "hrseq/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "hrseq/numerics.hpp"
#include "hrseq/random.hpp"

namespace hrseq {

CorpusError::CorpusError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

/// Length in bytes of the UTF-8 sequence starting at s[i], or 0 if invalid.
std::size_t utf8_sequence_length(std::string_view s, std::size_t i) {
  const auto lead = static_cast<unsigned char>(s[i]);
  std::size_t len = 0;
  std::uint32_t cp = 0;
  if (lead < 0x80) return 1;
  if ((lead & 0xE0) == 0xC0) {
    len = 2;
    cp = lead & 0x1F;
  } else if ((lead & 0xF0) == 0xE0) {
    len = 3;
    cp = lead & 0x0F;
  } else if ((lead & 0xF8) == 0xF0) {
    len = 4;
    cp = lead & 0x07;
  } else {
    return 0;
  }
  if (i + len > s.size()) return 0;
  for (std::size_t k = 1; k < len; ++k) {
    const auto cont = static_cast<unsigned char>(s[i + k]);
    if ((cont & 0xC0) != 0x80) return 0;
    cp = (cp << 6) | (cont & 0x3F);
  }
  // Overlong forms, surrogates, and out-of-range code points.
  static constexpr std::uint32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
  if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return 0;
  return len;
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), is_space);
}

}  // namespace

Sentence tokenize(std::string_view line, Tokenizer tokenizer) {
  Sentence tokens;
  std::size_t i = 0;
  if (tokenizer == Tokenizer::Whitespace) {
    while (i < line.size()) {
      while (i < line.size() && is_space(line[i])) ++i;
      const std::size_t start = i;
      while (i < line.size() && !is_space(line[i])) ++i;
      if (i > start) tokens.emplace_back(line.substr(start, i - start));
    }
    return tokens;
  }
  while (i < line.size()) {
    if (is_space(line[i])) {
      ++i;
      continue;
    }
    const std::size_t len = std::max<std::size_t>(utf8_sequence_length(line, i), 1);
    tokens.emplace_back(line.substr(i, len));
    i += len;
  }
  return tokens;
}

std::vector<Paragraph> load_corpus(std::istream& in, const CorpusOptions& options) {
  std::vector<Paragraph> paragraphs;
  Paragraph current;
  bool in_paragraph = false;
  auto flush = [&] {
    if (!current.sentences.empty()) paragraphs.push_back(std::move(current));
    current = Paragraph{};
    in_paragraph = false;
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    for (std::size_t i = 0; i < line.size();) {
      const std::size_t len = utf8_sequence_length(line, i);
      if (len == 0) throw CorpusError(line_no, "invalid UTF-8 at byte " + std::to_string(i + 1));
      i += len;
    }
    if (is_blank(line)) {
      if (in_paragraph) flush();
      continue;
    }
    in_paragraph = true;
    Sentence sentence = tokenize(line, options.tokenizer);
    if (sentence.size() <= options.max_sentence_len) current.sentences.push_back(std::move(sentence));
  }
  flush();
  return paragraphs;
}

std::vector<Paragraph> load_corpus_file(const std::string& path, const CorpusOptions& options) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open corpus file '" + path + "'");
  return load_corpus(in, options);
}

void write_corpus(std::ostream& out, const std::vector<Paragraph>& paragraphs) {
  for (std::size_t p = 0; p < paragraphs.size(); ++p) {
    if (p > 0) out << '\n';
    for (const auto& sentence : paragraphs[p].sentences) {
      for (std::size_t t = 0; t < sentence.size(); ++t) {
        if (t > 0) out << ' ';
        out << sentence[t];
      }
      out << '\n';
    }
  }
}

void write_corpus_file(const std::string& path, const std::vector<Paragraph>& paragraphs) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write corpus file '" + path + "'");
  write_corpus(out, paragraphs);
}

// --- Vocabulary -----------------------------------------------------------------

Vocabulary::Vocabulary() {
  add(std::string(kUnkSymbol), 0);
  add(std::string(kGoSymbol), 0);
  add(std::string(kEosSymbol), 0);
}

void Vocabulary::add(std::string token, std::size_t frequency) {
  index_.emplace(token, tokens_.size());
  tokens_.push_back(std::move(token));
  frequencies_.push_back(frequency);
}

std::map<std::string, std::size_t> count_tokens(const std::vector<Paragraph>& paragraphs) {
  std::map<std::string, std::size_t> counts;
  for (const auto& paragraph : paragraphs) {
    for (const auto& sentence : paragraph.sentences) {
      for (const auto& token : sentence) ++counts[token];
    }
  }
  return counts;
}

Vocabulary Vocabulary::build(const std::vector<Paragraph>& paragraphs, std::size_t min_count) {
  if (min_count < 1) throw InvalidInput("build_vocab: min_count must be >= 1");
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [token, count] : count_tokens(paragraphs)) {
    const bool reserved = token == kUnkSymbol || token == kGoSymbol || token == kEosSymbol;
    if (!reserved && count >= min_count) kept.emplace_back(token, count);
  }
  // count_tokens is ordered by token, so a stable sort on count alone
  // leaves ties in lexicographic order.
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocabulary vocab;
  for (auto& [token, count] : kept) vocab.add(std::move(token), count);
  return vocab;
}

Vocabulary Vocabulary::load(std::istream& in) {
  Vocabulary vocab;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no <= kReserved) {
      if (line != vocab.tokens_[line_no - 1]) {
        throw CorpusError(line_no, "vocabulary must start with " + vocab.tokens_[line_no - 1]);
      }
      continue;
    }
    if (line.empty()) throw CorpusError(line_no, "empty vocabulary entry");
    if (vocab.contains(line)) throw CorpusError(line_no, "duplicate vocabulary entry '" + line + "'");
    vocab.add(line, 0);
  }
  if (line_no < kReserved) throw CorpusError(line_no, "vocabulary is missing reserved symbols");
  return vocab;
}

Vocabulary Vocabulary::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open vocabulary file '" + path + "'");
  return load(in);
}

void Vocabulary::save(std::ostream& out) const {
  for (const auto& token : tokens_) out << token << '\n';
}

void Vocabulary::save_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write vocabulary file '" + path + "'");
  save(out);
}

bool Vocabulary::contains(std::string_view token) const {
  return index_.find(std::string(token)) != index_.end();
}

TokenId Vocabulary::id(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id >= tokens_.size()) throw InvalidInput("token id " + std::to_string(id) + " out of range");
  return tokens_[id];
}

std::size_t Vocabulary::frequency(TokenId id) const {
  if (id >= frequencies_.size()) throw InvalidInput("token id " + std::to_string(id) + " out of range");
  return frequencies_[id];
}

TokenSeq Vocabulary::encode(const Sentence& sentence) const {
  TokenSeq ids;
  ids.reserve(sentence.size() + 2);
  ids.push_back(kGo);
  for (const auto& token : sentence) ids.push_back(id(token));
  ids.push_back(kEos);
  return ids;
}

Sentence Vocabulary::decode(const TokenSeq& ids) const {
  Sentence out;
  for (TokenId id : ids) {
    if (id == kGo || id == kEos) continue;
    out.push_back(token(id));
  }
  return out;
}

// --- splitting and example extraction ----------------------------------------------

CorpusSplit split_corpus(const std::vector<Paragraph>& paragraphs, double train_fraction,
                         std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InvalidInput("split_corpus: train_fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> order(paragraphs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  const auto n_train = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(paragraphs.size())));
  CorpusSplit split;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_train ? split.train : split.test).push_back(paragraphs[order[i]]);
  }
  return split;
}

ContextWindow context_window(std::size_t target, std::size_t num_window) {
  if (num_window < 1) throw InvalidInput("num_window must be >= 1");
  return {target > num_window ? target - num_window : 0, target};
}

std::vector<TrainingExample> make_training_examples(const Paragraph& paragraph,
                                                    std::size_t num_window,
                                                    const Vocabulary& vocab) {
  if (num_window < 1) throw InvalidInput("make_training_examples: num_window must be >= 1");
  std::vector<TokenSeq> encoded;
  encoded.reserve(paragraph.sentences.size());
  for (const auto& sentence : paragraph.sentences) encoded.push_back(vocab.encode(sentence));

  std::vector<TrainingExample> examples;
  for (std::size_t m = 1; m < encoded.size(); ++m) {
    const ContextWindow w = context_window(m, num_window);
    TrainingExample ex;
    ex.context.assign(encoded.begin() + static_cast<std::ptrdiff_t>(w.first),
                      encoded.begin() + static_cast<std::ptrdiff_t>(w.last));
    ex.target = encoded[m];
    examples.push_back(std::move(ex));
  }
  return examples;
}

std::vector<TrainingExample> make_training_examples(const std::vector<Paragraph>& paragraphs,
                                                    std::size_t num_window,
                                                    const Vocabulary& vocab) {
  std::vector<TrainingExample> all;
  for (const auto& paragraph : paragraphs) {
    auto examples = make_training_examples(paragraph, num_window, vocab);
    all.insert(all.end(), std::make_move_iterator(examples.begin()),
               std::make_move_iterator(examples.end()));
  }
  return all;
}

}  // namespace hrseq
