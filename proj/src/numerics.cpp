// SPDX-License-Identifier: Apache-2.0
#include "hrseq/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hrseq {

void Vector::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw InvalidInput("Matrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

void Matrix::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

Vector matvec(const Matrix& a, const Vector& x) {
  if (a.cols() != x.dim()) {
    throw InvalidInput("matvec: matrix has " + std::to_string(a.cols()) +
                       " columns but vector has dimension " + std::to_string(x.dim()));
  }
  Vector out(a.rows());
  matvec_accumulate(a, x.values(), out.values());
  return out;
}

Vector matvec_transposed(const Matrix& a, const Vector& y) {
  if (a.rows() != y.dim()) {
    throw InvalidInput("matvec_transposed: matrix has " + std::to_string(a.rows()) +
                       " rows but vector has dimension " + std::to_string(y.dim()));
  }
  Vector out(a.cols());
  matvec_transposed_accumulate(a, y.values(), out.values());
  return out;
}

void matvec_accumulate(const Matrix& a, std::span<const double> x, std::span<double> out) {
  for (std::size_t i = 0; i < a.rows(); ++i) out[i] += dot(a.row(i), x);
}

void matvec_transposed_accumulate(const Matrix& a, std::span<const double> y,
                                  std::span<double> out) {
  for (std::size_t i = 0; i < a.rows(); ++i) {
    if (y[i] != 0.0) axpy(y[i], a.row(i), out);
  }
}

void add_outer(Matrix& g, std::span<const double> a, std::span<const double> b) {
  for (std::size_t i = 0; i < g.rows(); ++i) {
    if (a[i] != 0.0) axpy(a[i], b, g.row(i));
  }
}

Vector concat(const Vector& a, const Vector& b) {
  std::vector<double> out;
  out.reserve(a.dim() + b.dim());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return Vector(std::move(out));
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

namespace {

void require_same_dim(const Vector& a, const Vector& b, const char* what) {
  if (a.dim() != b.dim()) {
    throw InvalidInput(std::string(what) + ": dimension mismatch (" + std::to_string(a.dim()) +
                       " vs " + std::to_string(b.dim()) + ")");
  }
}

template <typename F>
Vector map(const Vector& x, F f) {
  Vector out(x.dim());
  for (std::size_t i = 0; i < x.dim(); ++i) out[i] = f(x[i]);
  return out;
}

}  // namespace

Vector operator+(const Vector& a, const Vector& b) {
  require_same_dim(a, b, "operator+");
  Vector out(a);
  axpy(1.0, b.values(), out.values());
  return out;
}

Vector operator-(const Vector& a, const Vector& b) {
  require_same_dim(a, b, "operator-");
  Vector out(a);
  axpy(-1.0, b.values(), out.values());
  return out;
}

Vector operator*(double s, const Vector& a) {
  return map(a, [s](double v) { return s * v; });
}

Vector hadamard(const Vector& a, const Vector& b) {
  require_same_dim(a, b, "hadamard");
  Vector out(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) out[i] = a[i] * b[i];
  return out;
}

double sigmoid(double x) {
  // Branching keeps exp() from overflowing for large |x|.
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Vector sigmoid(const Vector& x) {
  return map(x, [](double v) { return sigmoid(v); });
}

Vector tanh(const Vector& x) {
  return map(x, [](double v) { return std::tanh(v); });
}

Vector sigmoid_backward(const Vector& y, const Vector& dy) {
  require_same_dim(y, dy, "sigmoid_backward");
  Vector out(y.dim());
  for (std::size_t i = 0; i < y.dim(); ++i) out[i] = dy[i] * y[i] * (1.0 - y[i]);
  return out;
}

Vector tanh_backward(const Vector& y, const Vector& dy) {
  require_same_dim(y, dy, "tanh_backward");
  Vector out(y.dim());
  for (std::size_t i = 0; i < y.dim(); ++i) out[i] = dy[i] * (1.0 - y[i] * y[i]);
  return out;
}

Vector softmax(const Vector& logits) {
  Vector out(logits.dim());
  if (logits.dim() == 0) return out;
  const double peak = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.dim(); ++i) {
    out[i] = std::exp(logits[i] - peak);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

Vector log_softmax(const Vector& logits) {
  Vector out(logits.dim());
  if (logits.dim() == 0) return out;
  const double peak = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double v : logits) total += std::exp(v - peak);
  const double log_norm = peak + std::log(total);
  for (std::size_t i = 0; i < logits.dim(); ++i) out[i] = logits[i] - log_norm;
  return out;
}

Vector softmax_backward(const Vector& p, const Vector& dp) {
  require_same_dim(p, dp, "softmax_backward");
  const double weighted = dot(p.values(), dp.values());
  Vector out(p.dim());
  for (std::size_t i = 0; i < p.dim(); ++i) out[i] = p[i] * (dp[i] - weighted);
  return out;
}

CrossEntropy cross_entropy(const Vector& logits, std::size_t target) {
  if (target >= logits.dim()) {
    throw InvalidInput("cross_entropy: target " + std::to_string(target) +
                       " out of range for " + std::to_string(logits.dim()) + " classes");
  }
  const Vector logp = log_softmax(logits);
  CrossEntropy ce;
  ce.loss = -logp[target];
  ce.grad = Vector(logits.dim());
  for (std::size_t i = 0; i < logits.dim(); ++i) ce.grad[i] = std::exp(logp[i]);
  ce.grad[target] -= 1.0;
  return ce;
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

Vector finite_difference_gradient(const ScalarFunction& f, const Vector& params, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidInput("finite_difference_gradient: epsilon must be > 0");
  Vector probe(params);
  Vector grad(params.dim());
  for (std::size_t i = 0; i < params.dim(); ++i) {
    const double saved = probe[i];
    probe[i] = saved + epsilon;
    const double up = f(probe);
    probe[i] = saved - epsilon;
    const double down = f(probe);
    probe[i] = saved;
    grad[i] = (up - down) / (2.0 * epsilon);
  }
  return grad;
}

double relative_error(double analytic, double numeric, double floor) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

}  // namespace hrseq
