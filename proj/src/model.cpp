// SPDX-License-Identifier: Apache-2.0
#include "hrseq/model.hpp"

#include <algorithm>

#include "hrseq/random.hpp"

namespace hrseq {

std::string_view to_string(Variant variant) {
  switch (variant) {
    case Variant::Seq2Seq: return "seq2seq";
    case Variant::Hred: return "hred";
    case Variant::HredAttention: return "hred_attention";
  }
  return "unknown";
}

std::optional<Variant> parse_variant(std::string_view name) {
  for (Variant v : {Variant::Seq2Seq, Variant::Hred, Variant::HredAttention}) {
    if (name == to_string(v)) return v;
  }
  return std::nullopt;
}

void ModelConfig::validate() const {
  if (vocab_size <= Vocabulary::kReserved) {
    throw InvalidInput("model: vocabulary must hold more than the reserved symbols");
  }
  if (!embed_dim || !word_hidden || !word_layers || !sent_hidden || !dec_hidden) {
    throw InvalidInput("model: every dimension must be positive");
  }
  if (dec_hidden != sent_hidden) {
    throw InvalidInput("model: dec_hidden (" + std::to_string(dec_hidden) +
                       ") must equal sent_hidden (" + std::to_string(sent_hidden) + ")");
  }
}

std::size_t ModelConfig::aux_dim() const {
  return variant == Variant::HredAttention ? word_hidden : sent_hidden;
}

ModelParams::ModelParams(const ModelConfig& cfg)
    : config(cfg),
      encoder(cfg.vocab_size, cfg.embed_dim, cfg.word_hidden, cfg.word_layers, cfg.sent_hidden) {
  config.validate();
  if (config.variant == Variant::HredAttention) {
    attention = AttentionParams(config.attention_dim(), config.dec_hidden, config.word_hidden);
  }
  decoder.dec_layer = GruLayerParams(config.embed_dim + config.aux_dim(), config.dec_hidden);
  decoder.w_out = Matrix(config.vocab_size, config.dec_hidden + config.aux_dim());
  decoder.b_out = Vector(config.vocab_size);
}

namespace {

template <typename Ref, typename Self>
std::vector<Ref> collect_tensors(Self& self) {
  std::vector<Ref> out;
  auto add_matrix = [&out](std::string name, auto& m) {
    out.push_back(Ref{std::move(name), {m.rows(), m.cols()}, m.values()});
  };
  auto add_vector = [&out](std::string name, auto& v) {
    out.push_back(Ref{std::move(name), {v.dim()}, v.values()});
  };
  auto add_gru = [&add_matrix](const std::string& prefix, auto& layer) {
    layer.for_each_matrix([&](const char* name, auto& m) { add_matrix(prefix + name, m); });
  };

  add_matrix("embedding", self.encoder.embedding);
  for (std::size_t l = 0; l < self.encoder.word_stack.layers.size(); ++l) {
    add_gru("word." + std::to_string(l) + ".", self.encoder.word_stack.layers[l]);
  }
  add_gru("sent.", self.encoder.sent_layer);
  if (self.config.variant == Variant::HredAttention) {
    add_matrix("attn.w_a", self.attention.w_a);
    add_matrix("attn.u_a", self.attention.u_a);
    add_vector("attn.v_a", self.attention.v_a);
  }
  add_gru("dec.", self.decoder.dec_layer);
  add_matrix("out.w", self.decoder.w_out);
  add_vector("out.b", self.decoder.b_out);
  return out;
}

}  // namespace

std::vector<TensorRef> ModelParams::tensors() { return collect_tensors<TensorRef>(*this); }

std::vector<ConstTensorRef> ModelParams::tensors() const {
  return collect_tensors<ConstTensorRef>(*this);
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors()) n += t.values.size();
  return n;
}

Vector ModelParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const auto& t : tensors()) flat.insert(flat.end(), t.values.begin(), t.values.end());
  return Vector(std::move(flat));
}

void ModelParams::assign_flat(const Vector& flat) {
  if (flat.dim() != parameter_count()) throw InvalidInput("assign_flat: size mismatch");
  std::size_t offset = 0;
  for (auto& t : tensors()) {
    std::copy_n(flat.raw().begin() + static_cast<std::ptrdiff_t>(offset), t.values.size(),
                t.values.begin());
    offset += t.values.size();
  }
}

void ModelParams::set_zero() {
  for (auto& t : tensors()) std::fill(t.values.begin(), t.values.end(), 0.0);
}

bool operator==(const ModelParams& a, const ModelParams& b) {
  if (!(a.config == b.config)) return false;
  const auto ta = a.tensors();
  const auto tb = b.tensors();
  if (ta.size() != tb.size()) return false;
  for (std::size_t i = 0; i < ta.size(); ++i) {
    if (ta[i].dims != tb[i].dims ||
        !std::equal(ta[i].values.begin(), ta[i].values.end(), tb[i].values.begin())) {
      return false;
    }
  }
  return true;
}

ModelParams init_params(const ModelConfig& config, double init_range, std::uint64_t seed) {
  if (init_range < 0.0) throw InvalidInput("init_params: init_range must be >= 0");
  ModelParams params(config);
  Rng rng(seed);
  for (auto& t : params.tensors()) {
    if (t.name == "out.b") continue;
    for (double& v : t.values) v = rng.uniform(-init_range, init_range);
  }
  return params;
}

}  // namespace hrseq
