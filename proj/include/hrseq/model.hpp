// SPDX-License-Identifier: Apache-2.0
/**
 * @file   model.hpp
 * @brief  Full parameter set of the three encoder-decoder variants and the
 *         uniform tensor view used by the optimizer, checkpoints and
 *         gradient checks.
 *
 * Variants share every code path that applies to them:
 *  - Seq2Seq:        the context window is flattened into one token sequence,
 *                    encoded by the word stack, and lifted to the decoder size
 *                    by a single sentence-level step; the decoder sees that
 *                    vector at every step.
 *  - Hred:           two-level encoding; the decoder sees the final
 *                    sentence-level state at every step.
 *  - HredAttention:  two-level encoding; the decoder attends over the word
 *                    states of the newest context sentence at every step.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hrseq/attention.hpp"
#include "hrseq/encoder.hpp"
#include "hrseq/gru.hpp"
#include "hrseq/numerics.hpp"

namespace hrseq {

enum class Variant { Seq2Seq, Hred, HredAttention };

std::string_view to_string(Variant variant);
/// Accepts "seq2seq", "hred" and "hred_attention".
std::optional<Variant> parse_variant(std::string_view name);

struct ModelConfig {
  Variant variant = Variant::HredAttention;
  std::size_t vocab_size = 0;
  std::size_t embed_dim = 300;
  std::size_t word_hidden = 1000;
  std::size_t word_layers = 3;
  std::size_t sent_hidden = 1500;
  std::size_t dec_hidden = 1500;
  std::size_t attn_dim = 0;  // 0 means dec_hidden

  /// Throws InvalidInput when a dimension is zero or dec_hidden != sent_hidden.
  void validate() const;
  std::size_t attention_dim() const { return attn_dim ? attn_dim : dec_hidden; }
  /// Width of the per-step conditioning vector: the attention context or s.
  std::size_t aux_dim() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct DecoderParams {
  GruLayerParams dec_layer;  // (embed_dim + aux_dim) → dec_hidden
  Matrix w_out;              // vocab_size × (dec_hidden + aux_dim)
  Vector b_out;              // vocab_size
};

/// Named, shaped, mutable view of one parameter tensor.
struct TensorRef {
  std::string name;
  std::vector<std::size_t> dims;
  std::span<double> values;
};

struct ConstTensorRef {
  std::string name;
  std::vector<std::size_t> dims;
  std::span<const double> values;
};

struct ModelParams {
  ModelConfig config;
  EncoderParams encoder;
  AttentionParams attention;  // empty unless config.variant == HredAttention
  DecoderParams decoder;

  ModelParams() = default;
  /// All tensors allocated and zero-filled.
  explicit ModelParams(const ModelConfig& config);

  /// Every trainable tensor in a fixed order.
  std::vector<TensorRef> tensors();
  std::vector<ConstTensorRef> tensors() const;

  std::size_t parameter_count() const;
  Vector flatten() const;
  void assign_flat(const Vector& flat);
  void set_zero();

  friend bool operator==(const ModelParams& a, const ModelParams& b);
};

/// Every weight uniform on [−init_range, init_range]; b_out zero.
ModelParams init_params(const ModelConfig& config, double init_range, std::uint64_t seed);

}  // namespace hrseq
