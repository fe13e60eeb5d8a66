// SPDX-License-Identifier: Apache-2.0
#include "hrseq/attention.hpp"

#include <cmath>

namespace hrseq {

AttentionParams::AttentionParams(std::size_t attn_dim, std::size_t dec_hidden,
                                 std::size_t word_hidden)
    : w_a(attn_dim, dec_hidden), u_a(attn_dim, word_hidden), v_a(attn_dim) {}

namespace {

void check_states(const std::vector<Vector>& enc_states) {
  if (enc_states.empty()) throw InvalidInput("attention: no encoder states to attend over");
}

}  // namespace

std::vector<Vector> project_keys(const AttentionParams& params,
                                 const std::vector<Vector>& enc_states) {
  std::vector<Vector> keys;
  keys.reserve(enc_states.size());
  for (const Vector& h : enc_states) keys.push_back(matvec(params.u_a, h));
  return keys;
}

const AttentionCache& attend(const AttentionParams& params, const std::vector<Vector>& keys,
                             const Vector& h_dec_prev, const std::vector<Vector>& enc_states,
                             AttentionCache& cache) {
  check_states(enc_states);
  if (keys.size() != enc_states.size()) throw InvalidInput("attend: key/state count mismatch");
  const Vector query = matvec(params.w_a, h_dec_prev);
  cache.h_dec = h_dec_prev;
  cache.hidden.resize(enc_states.size());
  Vector scores(enc_states.size());
  for (std::size_t j = 0; j < enc_states.size(); ++j) {
    cache.hidden[j] = tanh(query + keys[j]);
    scores[j] = dot(params.v_a.values(), cache.hidden[j].values());
  }
  cache.weights = softmax(scores);
  cache.context = attention_context(cache.weights, enc_states);
  return cache;
}

Vector attention_scores(const AttentionParams& params, const Vector& h_dec_prev,
                        const std::vector<Vector>& enc_states) {
  check_states(enc_states);
  AttentionCache cache;
  return attend(params, project_keys(params, enc_states), h_dec_prev, enc_states, cache).weights;
}

Vector attention_context(const Vector& weights, const std::vector<Vector>& enc_states) {
  if (weights.dim() != enc_states.size()) {
    throw InvalidInput("attention_context: " + std::to_string(weights.dim()) + " weights for " +
                       std::to_string(enc_states.size()) + " states");
  }
  check_states(enc_states);
  Vector out(enc_states.front().dim());
  for (std::size_t j = 0; j < enc_states.size(); ++j) {
    if (enc_states[j].dim() != out.dim()) throw InvalidInput("attention_context: ragged states");
    axpy(weights[j], enc_states[j].values(), out.values());
  }
  return out;
}

AttentionGrads attention_backward(const AttentionParams& params, const AttentionCache& cache,
                                  const std::vector<Vector>& enc_states,
                                  const Vector& grad_context, AttentionParams& grads,
                                  std::vector<Vector>& grad_enc_states) {
  const std::size_t n = enc_states.size();
  Vector grad_weights(n);
  for (std::size_t j = 0; j < n; ++j) {
    grad_weights[j] = dot(grad_context.values(), enc_states[j].values());
    axpy(cache.weights[j], grad_context.values(), grad_enc_states[j].values());
  }
  const Vector grad_scores = softmax_backward(cache.weights, grad_weights);

  Vector grad_query(params.attn_dim());
  for (std::size_t j = 0; j < n; ++j) {
    axpy(grad_scores[j], cache.hidden[j].values(), grads.v_a.values());
    const Vector grad_pre = tanh_backward(cache.hidden[j], grad_scores[j] * params.v_a);
    axpy(1.0, grad_pre.values(), grad_query.values());
    add_outer(grads.u_a, grad_pre.values(), enc_states[j].values());
    matvec_transposed_accumulate(params.u_a, grad_pre.values(), grad_enc_states[j].values());
  }
  add_outer(grads.w_a, grad_query.values(), cache.h_dec.values());
  return {matvec_transposed(params.w_a, grad_query)};
}

}  // namespace hrseq
