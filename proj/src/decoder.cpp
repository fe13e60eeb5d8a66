// SPDX-License-Identifier: Apache-2.0
#include "hrseq/decoder.hpp"

namespace hrseq {

std::vector<TokenSeq> encoder_input(Variant variant, const std::vector<TokenSeq>& context) {
  if (variant != Variant::Seq2Seq) return context;
  TokenSeq flat;
  for (const auto& sentence : context) flat.insert(flat.end(), sentence.begin(), sentence.end());
  return {flat};
}

DecodeSource source_from_encoded(const ModelParams& params, EncodedContext encoded) {
  DecodeSource source;
  source.encoded = std::move(encoded);
  if (params.config.variant == Variant::HredAttention) {
    source.keys = project_keys(params.attention, source.encoded.last_sentence_states);
  }
  return source;
}

DecodeSource prepare_source(const ModelParams& params, const std::vector<TokenSeq>& context,
                            ContextTrace* trace) {
  const auto input = encoder_input(params.config.variant, context);
  ContextTrace local;
  return source_from_encoded(params, encode_context(params.encoder, input, trace ? *trace : local));
}

StepOutput decoder_step(const ModelParams& params, const Vector& h_prev, TokenId w_prev,
                        const DecodeSource& source, DecoderStepCache* cache) {
  if (h_prev.dim() != params.config.dec_hidden) {
    throw InvalidInput("decoder_step: state has dimension " + std::to_string(h_prev.dim()) +
                       ", decoder expects " + std::to_string(params.config.dec_hidden));
  }
  DecoderStepCache local;
  DecoderStepCache& c = cache ? *cache : local;
  c.w_prev = w_prev;

  StepOutput out;
  if (params.config.variant == Variant::HredAttention) {
    attend(params.attention, source.keys, h_prev, source.encoded.last_sentence_states, c.attention);
    c.aux = c.attention.context;
    out.weights = c.attention.weights;
  } else {
    c.aux = source.encoded.s;
  }

  const Vector x = concat(embed(params.encoder.embedding, w_prev), c.aux);
  out.h = gru_step(params.decoder.dec_layer, x, h_prev, c.gru);
  c.output_input = concat(out.h, c.aux);
  out.logits = params.decoder.b_out;
  matvec_accumulate(params.decoder.w_out, c.output_input.values(), out.logits.values());
  return out;
}

StepOutput decoder_step(const ModelParams& params, const Vector& h_prev, TokenId w_prev,
                        const EncodedContext& ctx) {
  return decoder_step(params, h_prev, w_prev, source_from_encoded(params, ctx));
}

namespace {

void check_target(const TokenSeq& target, std::size_t vocab_size) {
  if (target.size() < 2 || target.front() != Vocabulary::kGo || target.back() != Vocabulary::kEos) {
    throw InvalidInput("teacher forcing: target must be framed as (go, ..., eos)");
  }
  for (TokenId id : target) {
    if (id >= vocab_size) throw InvalidInput("teacher forcing: target id out of range");
  }
}

}  // namespace

double teacher_forced_loss(const ModelParams& params, const TrainingExample& example,
                           ModelParams* grads, double grad_scale) {
  check_target(example.target, params.config.vocab_size);
  const bool attends = params.config.variant == Variant::HredAttention;
  const std::size_t steps = example.target.size() - 1;
  const double inv_steps = 1.0 / static_cast<double>(steps);

  ContextTrace trace;
  const DecodeSource source = prepare_source(params, example.context, grads ? &trace : nullptr);

  std::vector<DecoderStepCache> caches(grads ? steps : 0);
  std::vector<Vector> grad_logits(grads ? steps : 0);
  Vector h = source.encoded.s;
  double loss = 0.0;
  for (std::size_t t = 0; t < steps; ++t) {
    StepOutput step = decoder_step(params, h, example.target[t], source,
                                   grads ? &caches[t] : nullptr);
    CrossEntropy ce = cross_entropy(step.logits, example.target[t + 1]);
    loss += ce.loss * inv_steps;
    if (grads) grad_logits[t] = grad_scale * inv_steps * ce.grad;
    h = std::move(step.h);
  }
  if (!grads) return loss;

  const std::size_t dec_hidden = params.config.dec_hidden;
  const std::size_t embed_dim = params.config.embed_dim;
  const std::size_t aux_dim = params.config.aux_dim();
  const auto& enc_states = source.encoded.last_sentence_states;

  std::vector<Vector> grad_enc_states;
  if (attends) grad_enc_states.assign(enc_states.size(), Vector(params.config.word_hidden));
  Vector grad_static_aux(attends ? 0 : aux_dim);
  Vector carry(dec_hidden);  // dL/dh_t arriving from step t+1

  for (std::size_t t = steps; t-- > 0;) {
    const DecoderStepCache& c = caches[t];
    add_outer(grads->decoder.w_out, grad_logits[t].values(), c.output_input.values());
    axpy(1.0, grad_logits[t].values(), grads->decoder.b_out.values());
    const Vector grad_output_input = matvec_transposed(params.decoder.w_out, grad_logits[t]);

    Vector grad_h(dec_hidden);
    Vector grad_aux(aux_dim);
    for (std::size_t i = 0; i < dec_hidden; ++i) grad_h[i] = grad_output_input[i] + carry[i];
    for (std::size_t i = 0; i < aux_dim; ++i) grad_aux[i] = grad_output_input[dec_hidden + i];

    GruStepGrads g = gru_step_backward(params.decoder.dec_layer, c.gru, grad_h,
                                       grads->decoder.dec_layer);
    auto emb_row = grads->encoder.embedding.row(c.w_prev);
    for (std::size_t i = 0; i < embed_dim; ++i) emb_row[i] += g.x[i];
    for (std::size_t i = 0; i < aux_dim; ++i) grad_aux[i] += g.x[embed_dim + i];
    carry = std::move(g.h_prev);

    if (attends) {
      const AttentionGrads ag = attention_backward(params.attention, c.attention, enc_states,
                                                   grad_aux, grads->attention, grad_enc_states);
      axpy(1.0, ag.h_dec.values(), carry.values());
    } else {
      axpy(1.0, grad_aux.values(), grad_static_aux.values());
    }
  }

  // h_0 = s, and for the non-attending variants s also feeds every step.
  Vector grad_s = carry;
  if (!attends) axpy(1.0, grad_static_aux.values(), grad_s.values());
  encode_context_backward(params.encoder, trace, grad_s, grad_enc_states, grads->encoder);
  return loss;
}

TeacherForcedStats teacher_forced_stats(const ModelParams& params, const TrainingExample& example) {
  check_target(example.target, params.config.vocab_size);
  const DecodeSource source = prepare_source(params, example.context);
  TeacherForcedStats stats;
  stats.total = example.target.size() - 1;
  Vector h = source.encoded.s;
  for (std::size_t t = 0; t < stats.total; ++t) {
    StepOutput step = decoder_step(params, h, example.target[t], source);
    stats.loss += cross_entropy(step.logits, example.target[t + 1]).loss;
    if (argmax(step.logits.values()) == example.target[t + 1]) ++stats.correct;
    h = std::move(step.h);
  }
  stats.loss /= static_cast<double>(stats.total);
  return stats;
}

}  // namespace hrseq
