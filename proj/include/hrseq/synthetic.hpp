// SPDX-License-Identifier: Apache-2.0
/**
 * @file   synthetic.hpp
 * @brief  Deterministic toy corpora with known sentence-to-sentence
 *         structure, used to check that the models learn what they should.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hrseq/corpus.hpp"

namespace hrseq {

struct SuccessorCorpusOptions {
  std::size_t paragraphs = 200;
  std::size_t sentences = 6;
  std::size_t alphabet = 20;  // tokens w0 .. w{alphabet-1}
  std::size_t min_len = 3;
  std::size_t max_len = 5;
};

/// Each paragraph opens with a random sentence; every later sentence maps
/// its predecessor token by token through a fixed permutation of the
/// alphabet, so S_m is a function of S_{m-1} alone.
std::vector<Paragraph> successor_corpus(const SuccessorCorpusOptions& options, std::uint64_t seed);

/// The token that successor_corpus places after `token` (w_i → w_{(7i+3) mod n}).
std::size_t successor_index(std::size_t index, std::size_t alphabet);

struct LongRangeCorpusOptions {
  std::size_t paragraphs = 200;
  std::size_t sentences = 8;
  std::size_t heads = 4;    // tokens h0 .. h{heads-1}
  std::size_t bodies = 16;  // tokens b0 .. b{bodies-1}
  std::size_t min_len = 6;  // body length range
  std::size_t max_len = 8;
  std::size_t lag = 3;
  bool marker_last = true;  // place the head token at the end of the sentence
  std::size_t marker_repeat = 1;  // copies of the head token per sentence
};

/// Sentences are a head token plus a body; the head closes the sentence
/// when marker_last is set and opens it otherwise. The body is the
/// predecessor's body mapped through a fixed permutation (a word-level,
/// adjacent-sentence dependency); the head repeats the head of the sentence
/// `lag` places back (a sentence-level, long-range dependency). The first
/// `lag` heads are random.
std::vector<Paragraph> long_range_corpus(const LongRangeCorpusOptions& options,
                                         std::uint64_t seed);

}  // namespace hrseq
