// SPDX-License-Identifier: Apache-2.0
#include "hrseq/adam.hpp"

#include <cmath>

namespace hrseq {

void adam_step(AdamState& state, const std::vector<TensorRef>& params,
               const std::vector<ConstTensorRef>& grads, const AdamHyper& hyper) {
  if (params.size() != grads.size()) throw InvalidInput("adam_step: tensor count mismatch");
  std::size_t total = 0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k].values.size() != grads[k].values.size()) {
      throw InvalidInput("adam_step: shape mismatch for '" + params[k].name + "'");
    }
    total += params[k].values.size();
  }
  if (state.m.dim() != total || state.v.dim() != total) {
    throw InvalidInput("adam_step: optimizer state does not match parameter count");
  }

  ++state.t;
  const double t = static_cast<double>(state.t);
  const double correction1 = 1.0 - std::pow(hyper.beta1, t);
  const double correction2 = 1.0 - std::pow(hyper.beta2, t);

  std::size_t i = 0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto theta = params[k].values;
    auto g = grads[k].values;
    for (std::size_t j = 0; j < theta.size(); ++j, ++i) {
      state.m[i] = hyper.beta1 * state.m[i] + (1.0 - hyper.beta1) * g[j];
      state.v[i] = hyper.beta2 * state.v[i] + (1.0 - hyper.beta2) * g[j] * g[j];
      const double m_hat = state.m[i] / correction1;
      const double v_hat = state.v[i] / correction2;
      theta[j] -= hyper.lr * m_hat / (std::sqrt(v_hat) + hyper.epsilon);
    }
  }
}

void adam_step(AdamState& state, ModelParams& params, const ModelParams& grads,
               const AdamHyper& hyper) {
  adam_step(state, params.tensors(), grads.tensors(), hyper);
}

double clip_global_norm(ModelParams& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& t : std::as_const(grads).tensors()) {
    for (double g : t.values) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (auto& t : grads.tensors()) {
      for (double& g : t.values) g *= scale;
    }
  }
  return norm;
}

}  // namespace hrseq
