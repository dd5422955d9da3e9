// SPDX-License-Identifier: Apache-2.0
#include "coursecue/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "coursecue/error.hpp"

namespace coursecue {

Tensor::Tensor(std::vector<std::size_t> shape, Scalar fill) : shape_(std::move(shape)) {
  if (shape_.empty() || shape_.size() > 2) throw ValidationError("tensor rank must be 1 or 2");
  std::size_t n = std::accumulate(shape_.begin(), shape_.end(), std::size_t{1}, std::multiplies<>());
  data_.assign(n, fill);
}

Tensor Tensor::from_values(std::vector<std::size_t> shape, std::vector<Scalar> values) {
  Tensor t(std::move(shape));
  if (values.size() != t.size()) {
    throw ValidationError("tensor data length " + std::to_string(values.size()) + " does not match shape " +
                          t.shape_string());
  }
  t.data_ = std::move(values);
  return t;
}

void Tensor::fill(Scalar value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](Scalar v) { return std::isfinite(v); });
}

std::string Tensor::shape_string() const {
  std::string s = "[";
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) s += " x ";
    s += std::to_string(shape_[i]);
  }
  return s + "]";
}

namespace kernels {

void gemm_nt(const Scalar* a, const Scalar* b, Scalar* c, std::size_t n, std::size_t k, std::size_t m,
             bool accumulate) {
  for (std::size_t i = 0; i < n; ++i) {
    const Scalar* ai = a + i * k;
    Scalar* ci = c + i * m;
    for (std::size_t j = 0; j < m; ++j) {
      const Scalar* bj = b + j * k;
      Scalar s = 0;
      for (std::size_t p = 0; p < k; ++p) s += ai[p] * bj[p];
      ci[j] = accumulate ? ci[j] + s : s;
    }
  }
}

void gemm_nn_acc(const Scalar* a, const Scalar* b, Scalar* c, std::size_t n, std::size_t k, std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    const Scalar* ai = a + i * k;
    Scalar* ci = c + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const Scalar s = ai[p];
      if (s == 0) continue;
      const Scalar* bp = b + p * m;
      for (std::size_t j = 0; j < m; ++j) ci[j] += s * bp[j];
    }
  }
}

void gemm_tn_acc(const Scalar* a, const Scalar* b, Scalar* c, std::size_t n, std::size_t k, std::size_t m) {
  for (std::size_t r = 0; r < n; ++r) {
    const Scalar* ar = a + r * k;
    const Scalar* br = b + r * m;
    for (std::size_t p = 0; p < k; ++p) {
      const Scalar s = ar[p];
      if (s == 0) continue;
      Scalar* cp = c + p * m;
      for (std::size_t j = 0; j < m; ++j) cp[j] += s * br[j];
    }
  }
}

}  // namespace kernels

}  // namespace coursecue
