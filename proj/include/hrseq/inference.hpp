// SPDX-License-Identifier: Apache-2.0
/**
 * @file   inference.hpp
 * @brief  Greedy decoding, beam search, an exhaustive reference search for
 *         tests, and sentence-by-sentence paragraph generation.
 *
 * Decoding starts from <go>. <unk> and <go> are never proposed; a hypothesis
 * finishes when it emits <eos> or reaches max_decode_len tokens. Log
 * probabilities are the model's full-vocabulary log-softmax values, so the
 * masked symbols are not renormalised away.
 */
#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "hrseq/corpus.hpp"
#include "hrseq/decoder.hpp"
#include "hrseq/model.hpp"

namespace hrseq {

struct InferenceConfig {
  std::size_t beam_width = 5;
  std::size_t max_decode_len = 21;  // 20 words + <eos>
  double length_norm_alpha = 0.0;

  void validate() const;
};

struct Hypothesis {
  TokenSeq tokens;        // generated ids, <eos> included when emitted
  double log_prob = 0.0;  // Σ log p(token | prefix)
  Vector state;           // decoder state after the last token
  bool finished = false;

  /// log_prob / len^alpha (len = tokens.size()).
  double score(double alpha) const;
  /// tokens without a trailing <eos>.
  TokenSeq content() const;
};

/// Argmax decoding; ties resolve to the lowest id.
Hypothesis greedy_decode(const ModelParams& params, const DecodeSource& source,
                         const InferenceConfig& cfg);

/// Up to beam_width finished hypotheses, best first. Ranking uses score()
/// with ties broken by lexicographic token order.
std::vector<Hypothesis> beam_search(const ModelParams& params, const DecodeSource& source,
                                    const InferenceConfig& cfg);

struct OracleResult {
  Hypothesis best;
  std::size_t enumerated = 0;
};

/// Scores every finishable sequence of at most max_len tokens and returns
/// the most probable. Throws InvalidInput when the search space exceeds
/// `limit` sequences.
OracleResult exhaustive_oracle(const ModelParams& params, const DecodeSource& source,
                               std::size_t max_len, std::size_t limit = 1'000'000);

/// Recomputes Σ log p(tokens[t] | go, tokens[<t]) one step at a time.
double sequence_log_prob(const ModelParams& params, const DecodeSource& source,
                         const TokenSeq& tokens);

/// Called before each generated sentence with its 0-based index and the
/// [first, last) indices of the sentences used as context.
using WindowObserver = std::function<void(std::size_t target, const ContextWindow&)>;

/// Starts from the seed sentence and appends num_sentences decoded sentences,
/// each conditioned on the previous (up to num_window) sentences.
Paragraph generate_paragraph(const ModelParams& params, const Vocabulary& vocab,
                             const Sentence& seed, std::size_t num_sentences,
                             std::size_t num_window, const InferenceConfig& cfg,
                             const WindowObserver& observer = {});

}  // namespace hrseq
