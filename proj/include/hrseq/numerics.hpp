// SPDX-License-Identifier: Apache-2.0
/**
 * @file   numerics.hpp
 * @brief  Dense row-major matrices, vectors and the differentiable
 *         elementwise primitives the recurrent model is assembled from.
 *
 * Every forward primitive that participates in training has a matching
 * backward rule here. Backward rules take the forward *output* where that is
 * sufficient (sigmoid, tanh, softmax) so callers only need to cache outputs.
 */
#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hrseq {

/// Raised for any caller-supplied value that violates an operation's contract.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t dim, double fill = 0.0) : data_(dim, fill) {}
  Vector(std::initializer_list<double> values) : data_(values) {}
  explicit Vector(std::vector<double> values) : data_(std::move(values)) {}

  std::size_t dim() const { return data_.size(); }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  const std::vector<double>& raw() const { return data_; }

  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

  void fill(double value);

  friend bool operator==(const Vector&, const Vector&) = default;

 private:
  std::vector<double> data_;
};

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  void fill(double value);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// --- linear algebra -------------------------------------------------------

/// A·x. Throws InvalidInput when A.cols() != x.dim().
Vector matvec(const Matrix& a, const Vector& x);

/// Aᵀ·y, the backward rule of matvec with respect to x.
Vector matvec_transposed(const Matrix& a, const Vector& y);

/// out += A·x over raw spans (no allocation); sizes are the caller's problem.
void matvec_accumulate(const Matrix& a, std::span<const double> x, std::span<double> out);

/// out += Aᵀ·y over raw spans.
void matvec_transposed_accumulate(const Matrix& a, std::span<const double> y,
                                  std::span<double> out);

/// G += a·bᵀ, the backward rule of matvec with respect to A.
void add_outer(Matrix& g, std::span<const double> a, std::span<const double> b);

Vector concat(const Vector& a, const Vector& b);
double dot(std::span<const double> a, std::span<const double> b);
/// y += alpha·x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

Vector operator+(const Vector& a, const Vector& b);
Vector operator-(const Vector& a, const Vector& b);
Vector operator*(double s, const Vector& a);
Vector hadamard(const Vector& a, const Vector& b);

// --- elementwise nonlinearities ---------------------------------------------

double sigmoid(double x);
Vector sigmoid(const Vector& x);
Vector tanh(const Vector& x);

/// dL/dx given y = sigmoid(x) and dL/dy.
Vector sigmoid_backward(const Vector& y, const Vector& dy);
/// dL/dx given y = tanh(x) and dL/dy.
Vector tanh_backward(const Vector& y, const Vector& dy);

// --- normalisation and loss ---------------------------------------------------

/// Max-shifted softmax; the result sums to one.
Vector softmax(const Vector& logits);
Vector log_softmax(const Vector& logits);

/// dL/dlogits given p = softmax(logits) and dL/dp.
Vector softmax_backward(const Vector& p, const Vector& dp);

struct CrossEntropy {
  double loss = 0.0;
  Vector grad;  // softmax(logits) - onehot(target)
};

/// -log softmax(logits)[target] with its gradient. Throws on a bad target.
CrossEntropy cross_entropy(const Vector& logits, std::size_t target);

/// Index of the largest entry; ties resolve to the lowest index.
std::size_t argmax(std::span<const double> values);

// --- gradient checking --------------------------------------------------------

using ScalarFunction = std::function<double(const Vector&)>;

/// Central differences (f(θ+εeᵢ) − f(θ−εeᵢ)) / 2ε for every coordinate.
Vector finite_difference_gradient(const ScalarFunction& f, const Vector& params, double epsilon);

/// |a − n| / max(|a|, |n|, floor). The floor keeps entries whose true
/// derivative is ~0 from being judged on round-off alone.
double relative_error(double analytic, double numeric, double floor = 1e-5);

}  // namespace hrseq
