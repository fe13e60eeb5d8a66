// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "hrseq/model.hpp"
#include "hrseq/numerics.hpp"

namespace hrseq {

struct AdamHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  friend bool operator==(const AdamHyper&, const AdamHyper&) = default;
};

/// First/second moments over the flattened parameter vector.
struct AdamState {
  Vector m;
  Vector v;
  std::uint64_t t = 0;

  AdamState() = default;
  explicit AdamState(std::size_t size) : m(size), v(size) {}
};

/// One bias-corrected Adam update over `params` (tensors visited in order,
/// their concatenation matching the state's layout):
///   m ← β1 m + (1−β1) g,  v ← β2 v + (1−β2) g²,
///   θ ← θ − lr · m̂ / (√v̂ + ε),  m̂ = m/(1−β1ᵗ), v̂ = v/(1−β2ᵗ).
void adam_step(AdamState& state, const std::vector<TensorRef>& params,
               const std::vector<ConstTensorRef>& grads, const AdamHyper& hyper);

void adam_step(AdamState& state, ModelParams& params, const ModelParams& grads,
               const AdamHyper& hyper);

/// Scales grads in place so their global L2 norm is at most max_norm
/// (no-op for max_norm <= 0). Returns the norm before clipping.
double clip_global_norm(ModelParams& grads, double max_norm);

}  // namespace hrseq
