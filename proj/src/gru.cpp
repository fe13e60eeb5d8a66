// SPDX-License-Identifier: Apache-2.0
#include "hrseq/gru.hpp"

#include <cmath>

namespace hrseq {

GruLayerParams::GruLayerParams(std::size_t input_dim, std::size_t hidden_dim)
    : w_z(hidden_dim, input_dim), u_z(hidden_dim, hidden_dim),
      w_r(hidden_dim, input_dim), u_r(hidden_dim, hidden_dim),
      w(hidden_dim, input_dim), u(hidden_dim, hidden_dim) {}

namespace {

void check_step_dims(const GruLayerParams& params, const Vector& x, const Vector& h_prev) {
  if (x.dim() != params.input_dim()) {
    throw InvalidInput("gru_step: input has dimension " + std::to_string(x.dim()) +
                       ", layer expects " + std::to_string(params.input_dim()));
  }
  if (h_prev.dim() != params.hidden_dim()) {
    throw InvalidInput("gru_step: state has dimension " + std::to_string(h_prev.dim()) +
                       ", layer expects " + std::to_string(params.hidden_dim()));
  }
}

}  // namespace

const Vector& gru_step(const GruLayerParams& params, const Vector& x, const Vector& h_prev,
                       GruStepCache& cache) {
  check_step_dims(params, x, h_prev);
  const std::size_t n = params.hidden_dim();
  cache.x = x;
  cache.h_prev = h_prev;

  Vector pre(n);
  matvec_accumulate(params.w_z, x.values(), pre.values());
  matvec_accumulate(params.u_z, h_prev.values(), pre.values());
  cache.z = sigmoid(pre);

  pre.fill(0.0);
  matvec_accumulate(params.w_r, x.values(), pre.values());
  matvec_accumulate(params.u_r, h_prev.values(), pre.values());
  cache.r = sigmoid(pre);

  cache.reset_h = hadamard(cache.r, h_prev);
  pre.fill(0.0);
  matvec_accumulate(params.w, x.values(), pre.values());
  matvec_accumulate(params.u, cache.reset_h.values(), pre.values());
  cache.candidate = tanh(pre);

  cache.h = Vector(n);
  for (std::size_t i = 0; i < n; ++i) {
    cache.h[i] = (1.0 - cache.z[i]) * h_prev[i] + cache.z[i] * cache.candidate[i];
  }
  return cache.h;
}

Vector gru_step(const GruLayerParams& params, const Vector& x, const Vector& h_prev) {
  GruStepCache cache;
  return gru_step(params, x, h_prev, cache);
}

GruStepGrads gru_step_backward(const GruLayerParams& params, const GruStepCache& cache,
                               const Vector& grad_h, GruLayerParams& grads) {
  const std::size_t n = params.hidden_dim();
  GruStepGrads out{Vector(params.input_dim()), Vector(n)};

  Vector d_z(n);
  Vector d_candidate(n);
  for (std::size_t i = 0; i < n; ++i) {
    d_z[i] = grad_h[i] * (cache.candidate[i] - cache.h_prev[i]);
    d_candidate[i] = grad_h[i] * cache.z[i];
    out.h_prev[i] = grad_h[i] * (1.0 - cache.z[i]);
  }

  // candidate = tanh(W x + U (r ⊙ h))
  const Vector d_cand_pre = tanh_backward(cache.candidate, d_candidate);
  add_outer(grads.w, d_cand_pre.values(), cache.x.values());
  add_outer(grads.u, d_cand_pre.values(), cache.reset_h.values());
  matvec_transposed_accumulate(params.w, d_cand_pre.values(), out.x.values());
  const Vector d_reset_h = matvec_transposed(params.u, d_cand_pre);

  Vector d_r(n);
  for (std::size_t i = 0; i < n; ++i) {
    d_r[i] = d_reset_h[i] * cache.h_prev[i];
    out.h_prev[i] += d_reset_h[i] * cache.r[i];
  }

  const Vector d_r_pre = sigmoid_backward(cache.r, d_r);
  add_outer(grads.w_r, d_r_pre.values(), cache.x.values());
  add_outer(grads.u_r, d_r_pre.values(), cache.h_prev.values());
  matvec_transposed_accumulate(params.w_r, d_r_pre.values(), out.x.values());
  matvec_transposed_accumulate(params.u_r, d_r_pre.values(), out.h_prev.values());

  const Vector d_z_pre = sigmoid_backward(cache.z, d_z);
  add_outer(grads.w_z, d_z_pre.values(), cache.x.values());
  add_outer(grads.u_z, d_z_pre.values(), cache.h_prev.values());
  matvec_transposed_accumulate(params.w_z, d_z_pre.values(), out.x.values());
  matvec_transposed_accumulate(params.u_z, d_z_pre.values(), out.h_prev.values());

  return out;
}

GruStack::GruStack(std::size_t input_dim, std::size_t hidden_dim, std::size_t num_layers) {
  if (num_layers < 1) throw InvalidInput("GruStack: at least one layer is required");
  layers.reserve(num_layers);
  layers.emplace_back(input_dim, hidden_dim);
  for (std::size_t l = 1; l < num_layers; ++l) layers.emplace_back(hidden_dim, hidden_dim);
}

void GruStack::validate() const {
  if (layers.empty()) throw InvalidInput("GruStack: at least one layer is required");
  for (std::size_t l = 1; l < layers.size(); ++l) {
    if (layers[l].input_dim() != layers[l - 1].hidden_dim()) {
      throw InvalidInput("GruStack: layer " + std::to_string(l) + " input dimension " +
                         std::to_string(layers[l].input_dim()) + " does not match layer " +
                         std::to_string(l - 1) + " hidden dimension " +
                         std::to_string(layers[l - 1].hidden_dim()));
    }
  }
}

GruUnrolled unroll(const GruStack& stack, const std::vector<Vector>& inputs,
                   const std::vector<Vector>& initial) {
  stack.validate();
  if (inputs.empty()) throw InvalidInput("unroll: empty input sequence");
  if (!initial.empty() && initial.size() != stack.layers.size()) {
    throw InvalidInput("unroll: need one initial state per layer");
  }
  GruUnrolled run;
  run.steps.resize(stack.layers.size());
  for (std::size_t l = 0; l < stack.layers.size(); ++l) {
    const GruLayerParams& layer = stack.layers[l];
    auto& caches = run.steps[l];
    caches.resize(inputs.size());
    Vector h = initial.empty() ? Vector(layer.hidden_dim()) : initial[l];
    for (std::size_t t = 0; t < inputs.size(); ++t) {
      const Vector& x = l == 0 ? inputs[t] : run.steps[l - 1][t].h;
      h = gru_step(layer, x, h, caches[t]);
    }
  }
  return run;
}

std::vector<Vector> unroll_backward(const GruStack& stack, const GruUnrolled& run,
                                    const std::vector<Vector>& grad_top, GruStack& grads,
                                    std::vector<Vector>* grad_initial) {
  const std::size_t steps = run.length();
  if (grad_top.size() != steps) throw InvalidInput("unroll_backward: gradient length mismatch");
  if (grad_initial) grad_initial->assign(stack.layers.size(), Vector());

  std::vector<Vector> grad_out = grad_top;  // dL/d(output of current layer)
  for (std::size_t l = stack.layers.size(); l-- > 0;) {
    const GruLayerParams& layer = stack.layers[l];
    std::vector<Vector> grad_in(steps);
    Vector carry(layer.hidden_dim());
    for (std::size_t t = steps; t-- > 0;) {
      const Vector g = grad_out[t].dim() ? grad_out[t] + carry : carry;
      GruStepGrads step = gru_step_backward(layer, run.steps[l][t], g, grads.layers[l]);
      grad_in[t] = std::move(step.x);
      carry = std::move(step.h_prev);
    }
    if (grad_initial) (*grad_initial)[l] = std::move(carry);
    grad_out = std::move(grad_in);
  }
  return grad_out;
}

}  // namespace hrseq
