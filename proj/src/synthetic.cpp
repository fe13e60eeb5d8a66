// SPDX-License-Identifier: Apache-2.0
#include "hrseq/synthetic.hpp"

#include <numeric>
#include <string>

#include "hrseq/numerics.hpp"
#include "hrseq/random.hpp"

namespace hrseq {

std::size_t successor_index(std::size_t index, std::size_t alphabet) {
  // 7 must stay coprime with the alphabet size for this to be a permutation.
  return (7 * index + 3) % alphabet;
}

namespace {

void check_permutation_alphabet(std::size_t alphabet) {
  if (alphabet < 2 || std::gcd<std::size_t, std::size_t>(7, alphabet) != 1) {
    throw InvalidInput("synthetic corpus: alphabet size must be >= 2 and coprime with 7");
  }
}

std::vector<std::size_t> random_indices(Rng& rng, std::size_t min_len, std::size_t max_len,
                                        std::size_t alphabet) {
  const std::size_t len = min_len + static_cast<std::size_t>(rng.below(max_len - min_len + 1));
  std::vector<std::size_t> out(len);
  for (auto& i : out) i = static_cast<std::size_t>(rng.below(alphabet));
  return out;
}

}  // namespace

std::vector<Paragraph> successor_corpus(const SuccessorCorpusOptions& options, std::uint64_t seed) {
  check_permutation_alphabet(options.alphabet);
  if (options.min_len < 1 || options.max_len < options.min_len) {
    throw InvalidInput("synthetic corpus: bad sentence length range");
  }
  Rng rng(seed);
  std::vector<Paragraph> out(options.paragraphs);
  for (auto& paragraph : out) {
    std::vector<std::size_t> indices =
        random_indices(rng, options.min_len, options.max_len, options.alphabet);
    for (std::size_t m = 0; m < options.sentences; ++m) {
      Sentence sentence;
      for (std::size_t i : indices) sentence.push_back("w" + std::to_string(i));
      paragraph.sentences.push_back(std::move(sentence));
      for (auto& i : indices) i = successor_index(i, options.alphabet);
    }
  }
  return out;
}

std::vector<Paragraph> long_range_corpus(const LongRangeCorpusOptions& options,
                                         std::uint64_t seed) {
  check_permutation_alphabet(options.bodies);
  if (options.heads < 1 || options.lag < 1 || options.marker_repeat < 1 || options.min_len < 1 ||
      options.max_len < options.min_len) {
    throw InvalidInput("synthetic corpus: bad long-range options");
  }
  Rng rng(seed);
  std::vector<Paragraph> out(options.paragraphs);
  for (auto& paragraph : out) {
    std::vector<std::size_t> heads;
    std::vector<std::size_t> body =
        random_indices(rng, options.min_len, options.max_len, options.bodies);
    for (std::size_t m = 0; m < options.sentences; ++m) {
      heads.push_back(m < options.lag ? static_cast<std::size_t>(rng.below(options.heads))
                                      : heads[m - options.lag]);
      const Sentence marker(options.marker_repeat, "h" + std::to_string(heads.back()));
      Sentence sentence;
      if (!options.marker_last) sentence = marker;
      for (std::size_t i : body) sentence.push_back("b" + std::to_string(i));
      if (options.marker_last) sentence.insert(sentence.end(), marker.begin(), marker.end());
      paragraph.sentences.push_back(std::move(sentence));
      for (auto& i : body) i = successor_index(i, options.bodies);
    }
  }
  return out;
}

}  // namespace hrseq
