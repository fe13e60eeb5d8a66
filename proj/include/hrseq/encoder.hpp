// SPDX-License-Identifier: Apache-2.0
/**
 * @file   encoder.hpp
 * @brief  Two-level context encoder. A word-level GRU stack turns each
 *         context sentence into a vector (its top layer's final state); a
 *         sentence-level GRU runs over those vectors, oldest first, and its
 *         final state initialises the decoder.
 */
#pragma once

#include <vector>

#include "hrseq/corpus.hpp"
#include "hrseq/gru.hpp"
#include "hrseq/numerics.hpp"

namespace hrseq {

struct EncoderParams {
  Matrix embedding;          // vocab_size × embed_dim, shared with the decoder
  GruStack word_stack;       // embed_dim → word_hidden
  GruLayerParams sent_layer; // word_hidden → sent_hidden

  EncoderParams() = default;
  EncoderParams(std::size_t vocab_size, std::size_t embed_dim, std::size_t word_hidden,
                std::size_t word_layers, std::size_t sent_hidden);

  std::size_t vocab_size() const { return embedding.rows(); }
  std::size_t embed_dim() const { return embedding.cols(); }
  std::size_t word_hidden() const { return word_stack.hidden_dim(); }
  std::size_t sent_hidden() const { return sent_layer.hidden_dim(); }
};

/// Row `id` of the embedding table. Throws InvalidInput if id is out of range.
Vector embed(const Matrix& embedding, TokenId id);

struct SentenceEncoding {
  Vector vector;                    // top layer's final state
  std::vector<Vector> word_states;  // top layer's state after each token
};

struct EncodedContext {
  Vector s;                                 // final sentence-level state
  std::vector<Vector> last_sentence_states; // word states of the newest sentence
};

SentenceEncoding encode_sentence_vec(const EncoderParams& params, const TokenSeq& ids);
EncodedContext encode_context(const EncoderParams& params, const std::vector<TokenSeq>& context);

/// Forward record of encode_context for backpropagation.
struct ContextTrace {
  std::vector<TokenSeq> sentences;
  std::vector<GruUnrolled> word_runs;         // one per context sentence
  std::vector<GruStepCache> sentence_steps;   // one per context sentence
};

EncodedContext encode_context(const EncoderParams& params, const std::vector<TokenSeq>& context,
                              ContextTrace& trace);

/// Backpropagates dL/ds and dL/d(last_sentence_states) (empty = zero) through
/// both levels and the embedding lookup, accumulating into grads.
void encode_context_backward(const EncoderParams& params, const ContextTrace& trace,
                             const Vector& grad_s, const std::vector<Vector>& grad_last_states,
                             EncoderParams& grads);

}  // namespace hrseq
