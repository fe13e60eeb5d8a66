// SPDX-License-Identifier: Apache-2.0
/**
 * @file   decoder.hpp
 * @brief  GRU decoder conditioned on the encoded context, and the
 *         teacher-forced cross-entropy loss with its full gradient.
 *
 * One decoding step, with c_t the conditioning vector (the attention
 * context over the newest sentence, or the constant encoder state s):
 *
 *   h_t      = GRU(h_{t−1}, [embed(w_{t−1}); c_t])      h_0 = s
 *   logits_t = W_out [h_t; c_t] + b_out
 */
#pragma once

#include <vector>

#include "hrseq/attention.hpp"
#include "hrseq/corpus.hpp"
#include "hrseq/encoder.hpp"
#include "hrseq/model.hpp"

namespace hrseq {

/// The encoder input sequence list for a variant: the context itself for
/// the hierarchical variants, one concatenated sequence for Seq2Seq.
std::vector<TokenSeq> encoder_input(Variant variant, const std::vector<TokenSeq>& context);

/// Encoder output plus the attention keys, computed once per context.
struct DecodeSource {
  EncodedContext encoded;
  std::vector<Vector> keys;  // empty unless the model attends
};

DecodeSource prepare_source(const ModelParams& params, const std::vector<TokenSeq>& context,
                            ContextTrace* trace = nullptr);
/// Wraps an already-encoded context (e.g. one injected by a test).
DecodeSource source_from_encoded(const ModelParams& params, EncodedContext encoded);

struct DecoderStepCache {
  TokenId w_prev = 0;
  AttentionCache attention;
  GruStepCache gru;
  Vector aux;
  Vector output_input;  // [h_t; c_t]
};

struct StepOutput {
  Vector h;
  Vector logits;
  Vector weights;  // attention weights; empty for non-attention variants
};

StepOutput decoder_step(const ModelParams& params, const Vector& h_prev, TokenId w_prev,
                        const DecodeSource& source, DecoderStepCache* cache = nullptr);
StepOutput decoder_step(const ModelParams& params, const Vector& h_prev, TokenId w_prev,
                        const EncodedContext& ctx);

/// Mean per-token cross entropy of the framed target given its context.
/// When grads is non-null, grad_scale·∂loss/∂θ is added into it.
double teacher_forced_loss(const ModelParams& params, const TrainingExample& example,
                           ModelParams* grads = nullptr, double grad_scale = 1.0);

struct TeacherForcedStats {
  double loss = 0.0;         // mean over predicted tokens
  std::size_t correct = 0;   // argmax hits
  std::size_t total = 0;     // predicted tokens (target length − 1)
};

TeacherForcedStats teacher_forced_stats(const ModelParams& params, const TrainingExample& example);

}  // namespace hrseq
