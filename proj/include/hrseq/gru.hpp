// SPDX-License-Identifier: Apache-2.0
/**
 * @file   gru.hpp
 * @brief  Bias-free gated recurrent unit, its backward pass, and stacked
 *         unrolling over a sequence.
 *
 *   z  = σ(W_z x + U_z h)
 *   r  = σ(W_r x + U_r h)
 *   h~ = tanh(W x + U (r ⊙ h))
 *   h' = (1 − z) ⊙ h + z ⊙ h~
 */
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "hrseq/numerics.hpp"

namespace hrseq {

struct GruLayerParams {
  Matrix w_z, u_z;  // update gate
  Matrix w_r, u_r;  // reset gate
  Matrix w, u;      // candidate

  GruLayerParams() = default;
  GruLayerParams(std::size_t input_dim, std::size_t hidden_dim);

  std::size_t input_dim() const { return w_z.cols(); }
  std::size_t hidden_dim() const { return w_z.rows(); }

  /// Visits (name, tensor) for each of the six weight matrices.
  template <typename F>
  void for_each_matrix(F&& f) {
    f("w_z", w_z); f("u_z", u_z); f("w_r", w_r); f("u_r", u_r); f("w", w); f("u", u);
  }
  template <typename F>
  void for_each_matrix(F&& f) const {
    f("w_z", w_z); f("u_z", u_z); f("w_r", w_r); f("u_r", u_r); f("w", w); f("u", u);
  }
};

/// Forward intermediates needed by gru_step_backward.
struct GruStepCache {
  Vector x;
  Vector h_prev;
  Vector z;
  Vector r;
  Vector reset_h;  // r ⊙ h_prev
  Vector candidate;
  Vector h;
};

/// One recurrence step. Throws InvalidInput on dimension mismatch.
Vector gru_step(const GruLayerParams& params, const Vector& x, const Vector& h_prev);
/// Same as gru_step, recording the intermediates into cache.
const Vector& gru_step(const GruLayerParams& params, const Vector& x, const Vector& h_prev,
                       GruStepCache& cache);

struct GruStepGrads {
  Vector x;
  Vector h_prev;
};

/// Backpropagates dL/dh through one step. Parameter gradients are
/// accumulated into `grads` (which must be shaped like `params`).
GruStepGrads gru_step_backward(const GruLayerParams& params, const GruStepCache& cache,
                               const Vector& grad_h, GruLayerParams& grads);

struct GruStack {
  std::vector<GruLayerParams> layers;

  GruStack() = default;
  /// layers[0] maps input_dim → hidden_dim, later layers hidden_dim → hidden_dim.
  GruStack(std::size_t input_dim, std::size_t hidden_dim, std::size_t num_layers);

  std::size_t input_dim() const { return layers.front().input_dim(); }
  std::size_t hidden_dim() const { return layers.back().hidden_dim(); }
  /// Throws InvalidInput unless the stack is non-empty and dimensions chain.
  void validate() const;
};

/// Per-layer, per-step states and caches from unrolling a stack.
struct GruUnrolled {
  std::vector<std::vector<GruStepCache>> steps;  // [layer][t]

  std::size_t length() const { return steps.empty() ? 0 : steps.front().size(); }
  const Vector& state(std::size_t layer, std::size_t t) const { return steps[layer][t].h; }
  const Vector& top(std::size_t t) const { return steps.back()[t].h; }
  const Vector& top_final() const { return steps.back().back().h; }
};

/// Runs every layer over the whole sequence; layer i consumes layer i−1's
/// states. `initial` holds one start state per layer, or is empty for zeros.
GruUnrolled unroll(const GruStack& stack, const std::vector<Vector>& inputs,
                   const std::vector<Vector>& initial = {});

/// BPTT through an unrolled stack. grad_top[t] is dL/d(top state at t); an
/// empty vector stands for zero.
/// Returns dL/d(inputs[t]); parameter gradients accumulate into `grads`.
/// When grad_initial is non-null it receives dL/d(initial state) per layer.
std::vector<Vector> unroll_backward(const GruStack& stack, const GruUnrolled& run,
                                    const std::vector<Vector>& grad_top, GruStack& grads,
                                    std::vector<Vector>* grad_initial = nullptr);

}  // namespace hrseq
