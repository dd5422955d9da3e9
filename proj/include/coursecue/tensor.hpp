// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace coursecue {

#ifdef COURSECUE_SINGLE_PRECISION
using Scalar = float;
#else
using Scalar = double;
#endif

/// Dense row-major array of rank 1 or 2. Rank-1 tensors behave as a single
/// row in matrix contexts.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, Scalar fill = Scalar(0));

  static Tensor matrix(std::size_t rows, std::size_t cols, Scalar fill = Scalar(0)) {
    return Tensor({rows, cols}, fill);
  }
  static Tensor vector(std::size_t n, Scalar fill = Scalar(0)) { return Tensor({n}, fill); }
  static Tensor from_values(std::vector<std::size_t> shape, std::vector<Scalar> values);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t rows() const { return shape_.size() == 2 ? shape_[0] : 1; }
  std::size_t cols() const { return shape_.empty() ? 0 : shape_.back(); }

  Scalar* data() { return data_.data(); }
  const Scalar* data() const { return data_.data(); }
  std::span<Scalar> values() { return data_; }
  std::span<const Scalar> values() const { return data_; }

  Scalar& operator[](std::size_t i) { return data_[i]; }
  Scalar operator[](std::size_t i) const { return data_[i]; }
  Scalar& operator()(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  Scalar operator()(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
  Scalar* row(std::size_t r) { return data_.data() + r * cols(); }
  const Scalar* row(std::size_t r) const { return data_.data() + r * cols(); }

  void fill(Scalar value);
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  bool all_finite() const;
  std::string shape_string() const;

 private:
  std::vector<std::size_t> shape_;
  std::vector<Scalar> data_;
};

namespace kernels {

/// C[n x m] (+)= A[n x k] * B[m x k]^T
void gemm_nt(const Scalar* a, const Scalar* b, Scalar* c, std::size_t n, std::size_t k, std::size_t m,
             bool accumulate);
/// C[n x m] += A[n x k] * B[k x m]
void gemm_nn_acc(const Scalar* a, const Scalar* b, Scalar* c, std::size_t n, std::size_t k, std::size_t m);
/// C[k x m] += A[n x k]^T * B[n x m]
void gemm_tn_acc(const Scalar* a, const Scalar* b, Scalar* c, std::size_t n, std::size_t k, std::size_t m);

}  // namespace kernels

}  // namespace coursecue
