// SPDX-License-Identifier: Apache-2.0
/**
 * @file   attention.hpp
 * @brief  Additive attention of the previous decoder state over the word
 *         states of the newest context sentence.
 *
 *   e_j = v_a · tanh(W_a h_dec + U_a h_j),   a = softmax(e),   c = Σ_j a_j h_j
 */
#pragma once

#include <vector>

#include "hrseq/numerics.hpp"

namespace hrseq {

struct AttentionParams {
  Matrix w_a;  // attn_dim × dec_hidden
  Matrix u_a;  // attn_dim × word_hidden
  Vector v_a;  // attn_dim

  AttentionParams() = default;
  AttentionParams(std::size_t attn_dim, std::size_t dec_hidden, std::size_t word_hidden);

  std::size_t attn_dim() const { return v_a.dim(); }
};

/// Attention weights a_t; nonnegative and summing to one.
Vector attention_scores(const AttentionParams& params, const Vector& h_dec_prev,
                        const std::vector<Vector>& enc_states);

/// Σ_j weights[j]·enc_states[j].
Vector attention_context(const Vector& weights, const std::vector<Vector>& enc_states);

/// U_a h_j for every encoder state. Constant across decoding steps.
std::vector<Vector> project_keys(const AttentionParams& params,
                                 const std::vector<Vector>& enc_states);

struct AttentionCache {
  Vector h_dec;
  std::vector<Vector> hidden;  // tanh(W_a h_dec + U_a h_j)
  Vector weights;
  Vector context;
};

/// Scores plus context in one pass, reusing precomputed keys.
const AttentionCache& attend(const AttentionParams& params, const std::vector<Vector>& keys,
                             const Vector& h_dec_prev, const std::vector<Vector>& enc_states,
                             AttentionCache& cache);

struct AttentionGrads {
  Vector h_dec;
};

/// Backpropagates dL/dcontext. Encoder-state gradients accumulate into
/// grad_enc_states (sized like enc_states); parameter gradients into grads.
AttentionGrads attention_backward(const AttentionParams& params, const AttentionCache& cache,
                                  const std::vector<Vector>& enc_states,
                                  const Vector& grad_context, AttentionParams& grads,
                                  std::vector<Vector>& grad_enc_states);

}  // namespace hrseq
