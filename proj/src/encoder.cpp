// SPDX-License-Identifier: Apache-2.0
#include "hrseq/encoder.hpp"

#include <algorithm>

namespace hrseq {

EncoderParams::EncoderParams(std::size_t vocab_size, std::size_t embed_dim,
                             std::size_t word_hidden, std::size_t word_layers,
                             std::size_t sent_hidden)
    : embedding(vocab_size, embed_dim),
      word_stack(embed_dim, word_hidden, word_layers),
      sent_layer(word_hidden, sent_hidden) {}

Vector embed(const Matrix& embedding, TokenId id) {
  if (id >= embedding.rows()) {
    throw InvalidInput("token id " + std::to_string(id) + " out of range for vocabulary of " +
                       std::to_string(embedding.rows()));
  }
  const auto row = embedding.row(id);
  return Vector(std::vector<double>(row.begin(), row.end()));
}

namespace {

std::vector<Vector> embed_all(const Matrix& embedding, const TokenSeq& ids) {
  if (ids.empty()) throw InvalidInput("cannot encode an empty token sequence");
  std::vector<Vector> out;
  out.reserve(ids.size());
  for (TokenId id : ids) out.push_back(embed(embedding, id));
  return out;
}

}  // namespace

SentenceEncoding encode_sentence_vec(const EncoderParams& params, const TokenSeq& ids) {
  const GruUnrolled run = unroll(params.word_stack, embed_all(params.embedding, ids));
  SentenceEncoding out;
  out.word_states.reserve(run.length());
  for (std::size_t t = 0; t < run.length(); ++t) out.word_states.push_back(run.top(t));
  out.vector = run.top_final();
  return out;
}

EncodedContext encode_context(const EncoderParams& params, const std::vector<TokenSeq>& context,
                              ContextTrace& trace) {
  if (context.empty()) throw InvalidInput("encode_context: empty context");
  trace.sentences = context;
  trace.word_runs.clear();
  trace.sentence_steps.assign(context.size(), GruStepCache{});

  Vector s(params.sent_hidden());
  for (std::size_t k = 0; k < context.size(); ++k) {
    trace.word_runs.push_back(unroll(params.word_stack, embed_all(params.embedding, context[k])));
    s = gru_step(params.sent_layer, trace.word_runs.back().top_final(), s, trace.sentence_steps[k]);
  }

  EncodedContext out;
  out.s = std::move(s);
  const GruUnrolled& last = trace.word_runs.back();
  out.last_sentence_states.reserve(last.length());
  for (std::size_t t = 0; t < last.length(); ++t) out.last_sentence_states.push_back(last.top(t));
  return out;
}

EncodedContext encode_context(const EncoderParams& params, const std::vector<TokenSeq>& context) {
  ContextTrace trace;
  return encode_context(params, context, trace);
}

void encode_context_backward(const EncoderParams& params, const ContextTrace& trace,
                             const Vector& grad_s, const std::vector<Vector>& grad_last_states,
                             EncoderParams& grads) {
  const std::size_t k_count = trace.sentences.size();
  // Sentence level: only the final state feeds the decoder.
  std::vector<Vector> grad_sentence_vec(k_count);
  Vector carry = grad_s;
  for (std::size_t k = k_count; k-- > 0;) {
    GruStepGrads step = gru_step_backward(params.sent_layer, trace.sentence_steps[k], carry,
                                          grads.sent_layer);
    grad_sentence_vec[k] = std::move(step.x);
    carry = std::move(step.h_prev);
  }

  // Word level, then the embedding rows.
  for (std::size_t k = 0; k < k_count; ++k) {
    const GruUnrolled& run = trace.word_runs[k];
    std::vector<Vector> grad_top(run.length());
    if (k + 1 == k_count && !grad_last_states.empty()) {
      if (grad_last_states.size() != run.length()) {
        throw InvalidInput("encode_context_backward: word-state gradient length mismatch");
      }
      grad_top = grad_last_states;
    }
    Vector& final_grad = grad_top.back();
    final_grad = final_grad.dim() ? final_grad + grad_sentence_vec[k] : grad_sentence_vec[k];

    const std::vector<Vector> grad_inputs =
        unroll_backward(params.word_stack, run, grad_top, grads.word_stack);
    const TokenSeq& ids = trace.sentences[k];
    for (std::size_t t = 0; t < ids.size(); ++t) {
      axpy(1.0, grad_inputs[t].values(), grads.embedding.row(ids[t]));
    }
  }
}

}  // namespace hrseq
