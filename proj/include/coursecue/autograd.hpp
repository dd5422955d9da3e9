// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "coursecue/random.hpp"
#include "coursecue/tensor.hpp"

namespace coursecue {

/// Handle to a node of a Graph.
struct Var {
  std::uint32_t id = std::numeric_limits<std::uint32_t>::max();
  bool valid() const { return id != std::numeric_limits<std::uint32_t>::max(); }
};

/// Activation statistics gathered during a forward pass when a Trace is
/// attached to the graph.
struct Trace {
  std::size_t attention_rows = 0;
  double max_attention_row_error = 0.0;  // max |sum_j p_ij - 1|
  std::size_t layer_norm_rows = 0;
  double max_layer_norm_mean = 0.0;            // max |mean(x_hat)|
  double max_layer_norm_variance_error = 0.0;  // max |var(x_hat) - var/(var+eps)|
  double max_layer_norm_variance_gap = 0.0;    // max |var(x_hat) - 1|
  /// Attention probabilities per call, [blocks * heads * L * L] with padded
  /// entries zero, only when `keep_attention` is set.
  bool keep_attention = false;
  std::vector<std::vector<Scalar>> attention;
};

/// Tape for reverse-mode differentiation. Nodes are appended in evaluation
/// order; backward() walks them in reverse.
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, const Tensor& out_grad)>;

  Var constant(Tensor value);
  /// Leaf whose gradient is reported by parameter_grads().
  Var parameter(std::string name, Tensor value);

  Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward);
  Var record(Tensor value, std::span<const Var> inputs, BackwardFn backward);

  const Tensor& value(Var v) const { return nodes_[v.id].value; }
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }
  /// Gradient buffer, allocated as zeros on first access.
  Tensor& grad(Var v);
  bool has_grad(Var v) const { return !nodes_[v.id].grad.shape().empty(); }

  /// Seeds d(output)/d(output) = 1 for a single-element output.
  void backward(Var output);

  const std::vector<std::pair<std::string, Var>>& parameters() const { return parameters_; }
  std::size_t size() const { return nodes_.size(); }
  bool all_finite() const;

  Trace* trace = nullptr;

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    BackwardFn backward;
  };
  std::deque<Node> nodes_;
  std::vector<std::pair<std::string, Var>> parameters_;
};

/// Selects one row of one source tensor; source < 0 yields a zero row.
struct RowRef {
  std::int32_t source;
  std::uint32_t row;
};

namespace ops {

Var add(Graph& g, Var a, Var b);
/// x [n x m] + bias [m] broadcast over rows.
Var add_row(Graph& g, Var x, Var bias);
/// x [n x in] * weight[out x in]^T + bias[out].
Var linear(Graph& g, Var x, Var weight, Var bias);
Var relu(Graph& g, Var x);
/// Row-wise (x - mean) / sqrt(var + eps) * gain + bias, population variance.
Var layer_norm(Graph& g, Var x, Var gain, Var bias, Scalar eps);
/// Inverted dropout. Identity when rng is null or p == 0.
Var dropout(Graph& g, Var x, Scalar p, Rng* rng);
/// Builds a matrix out of rows taken from several sources with equal width.
Var gather_rows(Graph& g, std::span<const Var> sources, std::span<const RowRef> rows);
/// Mean of rows [begin, end) for each segment.
Var segment_mean(Graph& g, Var x, std::span<const std::pair<std::size_t, std::size_t>> segments);
Var concat_cols(Graph& g, Var a, Var b);
/// Multi-head scaled dot-product attention over stacked blocks. q, k, v are
/// [blocks * block_len x H]; block b holds lengths[b] valid rows followed by
/// padding. Padded keys are masked out and padded query rows yield zeros.
Var attention(Graph& g, Var q, Var k, Var v, std::size_t heads, std::size_t block_len,
              std::span<const std::size_t> lengths);
/// Mean squared error of predictions [n x 1] (or [n]) against targets.
Var mse(Graph& g, Var predictions, std::span<const Scalar> targets);

}  // namespace ops
}  // namespace coursecue
