// SPDX-License-Identifier: Apache-2.0
#include "coursecue/autograd.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "coursecue/error.hpp"

namespace coursecue {

Var Graph::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), Tensor{}, false, {}});
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Graph::parameter(std::string name, Tensor value) {
  nodes_.push_back(Node{std::move(value), Tensor{}, true, {}});
  Var v{static_cast<std::uint32_t>(nodes_.size() - 1)};
  parameters_.emplace_back(std::move(name), v);
  return v;
}

Var Graph::record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward) {
  return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()), std::move(backward));
}

Var Graph::record(Tensor value, std::span<const Var> inputs, BackwardFn backward) {
#ifndef NDEBUG
  assert(value.all_finite() && "non-finite activation");
#endif
  bool needs = false;
  for (Var in : inputs) needs = needs || nodes_[in.id].requires_grad;
  nodes_.push_back(Node{std::move(value), Tensor{}, needs, needs ? std::move(backward) : BackwardFn{}});
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Tensor& Graph::grad(Var v) {
  Node& node = nodes_[v.id];
  if (node.grad.shape().empty()) node.grad = Tensor(node.value.shape());
  return node.grad;
}

void Graph::backward(Var output) {
  if (value(output).size() != 1) throw ValidationError("backward() needs a single-element output");
  grad(output)[0] = 1;
  for (std::size_t i = output.id + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.backward || node.grad.shape().empty()) continue;
    node.backward(*this, node.grad);
  }
}

bool Graph::all_finite() const {
  return std::all_of(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.value.all_finite(); });
}

namespace ops {
namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ValidationError(what);
}

}  // namespace

Var add(Graph& g, Var a, Var b) {
  const Tensor& x = g.value(a);
  const Tensor& y = g.value(b);
  require(x.size() == y.size() && x.cols() == y.cols(), "add: shape mismatch");
  Tensor out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += y[i];
  return g.record(std::move(out), {a, b}, [a, b](Graph& g, const Tensor& dy) {
    for (Var in : {a, b}) {
      if (!g.requires_grad(in)) continue;
      Tensor& d = g.grad(in);
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += dy[i];
    }
  });
}

Var add_row(Graph& g, Var x, Var bias) {
  const Tensor& xv = g.value(x);
  const Tensor& bv = g.value(bias);
  require(bv.size() == xv.cols(), "add_row: bias width mismatch");
  Tensor out = xv;
  const std::size_t n = out.rows(), m = out.cols();
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < m; ++c) out(r, c) += bv[c];
  }
  return g.record(std::move(out), {x, bias}, [x, bias, n, m](Graph& g, const Tensor& dy) {
    if (g.requires_grad(x)) {
      Tensor& dx = g.grad(x);
      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dy[i];
    }
    if (g.requires_grad(bias)) {
      Tensor& db = g.grad(bias);
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < m; ++c) db[c] += dy(r, c);
      }
    }
  });
}

Var linear(Graph& g, Var x, Var weight, Var bias) {
  const Tensor& xv = g.value(x);
  const Tensor& wv = g.value(weight);
  const Tensor& bv = g.value(bias);
  const std::size_t n = xv.rows(), in = xv.cols(), out_dim = wv.rows();
  require(wv.cols() == in, "linear: weight input width mismatch");
  require(bv.size() == out_dim, "linear: bias width mismatch");
  Tensor out = Tensor::matrix(n, out_dim);
  kernels::gemm_nt(xv.data(), wv.data(), out.data(), n, in, out_dim, false);
  for (std::size_t r = 0; r < n; ++r) {
    Scalar* row = out.row(r);
    for (std::size_t c = 0; c < out_dim; ++c) row[c] += bv[c];
  }
  return g.record(std::move(out), {x, weight, bias}, [x, weight, bias, n, in, out_dim](Graph& g, const Tensor& dy) {
    if (g.requires_grad(x)) {
      kernels::gemm_nn_acc(dy.data(), g.value(weight).data(), g.grad(x).data(), n, out_dim, in);
    }
    if (g.requires_grad(weight)) {
      kernels::gemm_tn_acc(dy.data(), g.value(x).data(), g.grad(weight).data(), n, out_dim, in);
    }
    if (g.requires_grad(bias)) {
      Tensor& db = g.grad(bias);
      for (std::size_t r = 0; r < n; ++r) {
        const Scalar* row = dy.row(r);
        for (std::size_t c = 0; c < out_dim; ++c) db[c] += row[c];
      }
    }
  });
}

Var relu(Graph& g, Var x) {
  Tensor out = g.value(x);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = out[i] > 0 ? out[i] : Scalar(0);
  return g.record(std::move(out), {x}, [x](Graph& g, const Tensor& dy) {
    const Tensor& xv = g.value(x);
    Tensor& dx = g.grad(x);
    for (std::size_t i = 0; i < dx.size(); ++i) {
      if (xv[i] > 0) dx[i] += dy[i];
    }
  });
}

Var layer_norm(Graph& g, Var x, Var gain, Var bias, Scalar eps) {
  const Tensor& xv = g.value(x);
  const Tensor& gv = g.value(gain);
  const Tensor& bv = g.value(bias);
  const std::size_t n = xv.rows(), m = xv.cols();
  require(gv.size() == m && bv.size() == m, "layer_norm: parameter width mismatch");
  auto xhat = std::make_shared<Tensor>(Tensor::matrix(n, m));
  auto rstd = std::make_shared<std::vector<Scalar>>(n);
  Tensor out = Tensor::matrix(n, m);
  for (std::size_t r = 0; r < n; ++r) {
    const Scalar* xr = xv.row(r);
    Scalar mean = 0;
    for (std::size_t c = 0; c < m; ++c) mean += xr[c];
    mean /= static_cast<Scalar>(m);
    Scalar var = 0;
    for (std::size_t c = 0; c < m; ++c) var += (xr[c] - mean) * (xr[c] - mean);
    var /= static_cast<Scalar>(m);
    const Scalar inv = Scalar(1) / std::sqrt(var + eps);
    (*rstd)[r] = inv;
    Scalar* hr = xhat->row(r);
    Scalar* orow = out.row(r);
    for (std::size_t c = 0; c < m; ++c) {
      hr[c] = (xr[c] - mean) * inv;
      orow[c] = hr[c] * gv[c] + bv[c];
    }
    if (g.trace) {
      double hm = 0, hv = 0;
      for (std::size_t c = 0; c < m; ++c) hm += hr[c];
      hm /= static_cast<double>(m);
      for (std::size_t c = 0; c < m; ++c) hv += (hr[c] - hm) * (hr[c] - hm);
      hv /= static_cast<double>(m);
      const double expected = static_cast<double>(var) / (static_cast<double>(var) + static_cast<double>(eps));
      Trace& t = *g.trace;
      ++t.layer_norm_rows;
      t.max_layer_norm_mean = std::max(t.max_layer_norm_mean, std::fabs(hm));
      t.max_layer_norm_variance_error = std::max(t.max_layer_norm_variance_error, std::fabs(hv - expected));
      t.max_layer_norm_variance_gap = std::max(t.max_layer_norm_variance_gap, std::fabs(hv - 1.0));
    }
  }
  return g.record(std::move(out), {x, gain, bias}, [x, gain, bias, xhat, rstd, n, m](Graph& g, const Tensor& dy) {
    const Tensor& gv = g.value(gain);
    if (g.requires_grad(gain) || g.requires_grad(bias)) {
      Tensor* dg = g.requires_grad(gain) ? &g.grad(gain) : nullptr;
      Tensor* db = g.requires_grad(bias) ? &g.grad(bias) : nullptr;
      for (std::size_t r = 0; r < n; ++r) {
        const Scalar* dr = dy.row(r);
        const Scalar* hr = xhat->row(r);
        for (std::size_t c = 0; c < m; ++c) {
          if (dg) (*dg)[c] += dr[c] * hr[c];
          if (db) (*db)[c] += dr[c];
        }
      }
    }
    if (!g.requires_grad(x)) return;
    Tensor& dx = g.grad(x);
    std::vector<Scalar> dh(m);
    for (std::size_t r = 0; r < n; ++r) {
      const Scalar* dr = dy.row(r);
      const Scalar* hr = xhat->row(r);
      Scalar mean_dh = 0, mean_dh_h = 0;
      for (std::size_t c = 0; c < m; ++c) {
        dh[c] = dr[c] * gv[c];
        mean_dh += dh[c];
        mean_dh_h += dh[c] * hr[c];
      }
      mean_dh /= static_cast<Scalar>(m);
      mean_dh_h /= static_cast<Scalar>(m);
      Scalar* dxr = dx.row(r);
      const Scalar inv = (*rstd)[r];
      for (std::size_t c = 0; c < m; ++c) dxr[c] += inv * (dh[c] - mean_dh - hr[c] * mean_dh_h);
    }
  });
}

Var dropout(Graph& g, Var x, Scalar p, Rng* rng) {
  if (rng == nullptr || p <= 0) return x;
  require(p < 1, "dropout: probability must be < 1");
  const Tensor& xv = g.value(x);
  auto mask = std::make_shared<std::vector<Scalar>>(xv.size());
  const Scalar keep_scale = Scalar(1) / (Scalar(1) - p);
  Tensor out = xv;
  for (std::size_t i = 0; i < out.size(); ++i) {
    (*mask)[i] = rng->uniform() < static_cast<double>(p) ? Scalar(0) : keep_scale;
    out[i] *= (*mask)[i];
  }
  return g.record(std::move(out), {x}, [x, mask](Graph& g, const Tensor& dy) {
    Tensor& dx = g.grad(x);
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dy[i] * (*mask)[i];
  });
}

Var gather_rows(Graph& g, std::span<const Var> sources, std::span<const RowRef> rows) {
  require(!sources.empty(), "gather_rows: no sources");
  const std::size_t m = g.value(sources[0]).cols();
  for (Var s : sources) require(g.value(s).cols() == m, "gather_rows: sources differ in width");
  Tensor out = Tensor::matrix(rows.size(), m);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const RowRef ref = rows[r];
    if (ref.source < 0) continue;
    require(static_cast<std::size_t>(ref.source) < sources.size(), "gather_rows: bad source");
    const Tensor& src = g.value(sources[static_cast<std::size_t>(ref.source)]);
    require(ref.row < src.rows(), "gather_rows: row out of range");
    std::copy_n(src.row(ref.row), m, out.row(r));
  }
  std::vector<Var> inputs(sources.begin(), sources.end());
  auto refs = std::make_shared<std::vector<RowRef>>(rows.begin(), rows.end());
  return g.record(std::move(out), std::span<const Var>(inputs), [inputs, refs, m](Graph& g, const Tensor& dy) {
    for (std::size_t r = 0; r < refs->size(); ++r) {
      const RowRef ref = (*refs)[r];
      if (ref.source < 0) continue;
      Var src = inputs[static_cast<std::size_t>(ref.source)];
      if (!g.requires_grad(src)) continue;
      Scalar* d = g.grad(src).row(ref.row);
      const Scalar* from = dy.row(r);
      for (std::size_t c = 0; c < m; ++c) d[c] += from[c];
    }
  });
}

Var segment_mean(Graph& g, Var x, std::span<const std::pair<std::size_t, std::size_t>> segments) {
  const Tensor& xv = g.value(x);
  const std::size_t m = xv.cols();
  Tensor out = Tensor::matrix(segments.size(), m);
  for (std::size_t s = 0; s < segments.size(); ++s) {
    auto [begin, end] = segments[s];
    require(begin < end && end <= xv.rows(), "segment_mean: bad segment");
    Scalar* o = out.row(s);
    for (std::size_t r = begin; r < end; ++r) {
      for (std::size_t c = 0; c < m; ++c) o[c] += xv(r, c);
    }
    const Scalar inv = Scalar(1) / static_cast<Scalar>(end - begin);
    for (std::size_t c = 0; c < m; ++c) o[c] *= inv;
  }
  auto segs = std::make_shared<std::vector<std::pair<std::size_t, std::size_t>>>(segments.begin(), segments.end());
  return g.record(std::move(out), {x}, [x, segs, m](Graph& g, const Tensor& dy) {
    Tensor& dx = g.grad(x);
    for (std::size_t s = 0; s < segs->size(); ++s) {
      auto [begin, end] = (*segs)[s];
      const Scalar inv = Scalar(1) / static_cast<Scalar>(end - begin);
      for (std::size_t r = begin; r < end; ++r) {
        for (std::size_t c = 0; c < m; ++c) dx(r, c) += dy(s, c) * inv;
      }
    }
  });
}

Var concat_cols(Graph& g, Var a, Var b) {
  const Tensor& av = g.value(a);
  const Tensor& bv = g.value(b);
  require(av.rows() == bv.rows(), "concat_cols: row count mismatch");
  const std::size_t n = av.rows(), ma = av.cols(), mb = bv.cols();
  Tensor out = Tensor::matrix(n, ma + mb);
  for (std::size_t r = 0; r < n; ++r) {
    std::copy_n(av.row(r), ma, out.row(r));
    std::copy_n(bv.row(r), mb, out.row(r) + ma);
  }
  return g.record(std::move(out), {a, b}, [a, b, n, ma, mb](Graph& g, const Tensor& dy) {
    if (g.requires_grad(a)) {
      Tensor& da = g.grad(a);
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < ma; ++c) da(r, c) += dy(r, c);
      }
    }
    if (g.requires_grad(b)) {
      Tensor& db = g.grad(b);
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < mb; ++c) db(r, c) += dy(r, ma + c);
      }
    }
  });
}

Var attention(Graph& g, Var q, Var k, Var v, std::size_t heads, std::size_t block_len,
              std::span<const std::size_t> lengths) {
  const Tensor& qv = g.value(q);
  const Tensor& kv = g.value(k);
  const Tensor& vv = g.value(v);
  const std::size_t width = qv.cols();
  const std::size_t blocks = lengths.size();
  require(heads > 0 && width % heads == 0, "attention: width not divisible by heads");
  require(qv.rows() == blocks * block_len && kv.rows() == qv.rows() && vv.rows() == qv.rows(),
          "attention: row count mismatch");
  require(kv.cols() == width && vv.cols() == width, "attention: width mismatch");
  for (std::size_t len : lengths) require(len >= 1 && len <= block_len, "attention: bad block length");

  const std::size_t d = width / heads;
  const Scalar scale = Scalar(1) / std::sqrt(static_cast<Scalar>(d));
  const std::size_t L = block_len;
  auto probs = std::make_shared<std::vector<Scalar>>(blocks * heads * L * L, Scalar(0));
  Tensor out = Tensor::matrix(qv.rows(), width);

  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t len = lengths[b];
    const std::size_t base = b * L;
    for (std::size_t h = 0; h < heads; ++h) {
      Scalar* P = probs->data() + (b * heads + h) * L * L;
      const std::size_t off = h * d;
      for (std::size_t i = 0; i < len; ++i) {
        const Scalar* qi = qv.row(base + i) + off;
        Scalar* Pi = P + i * L;
        Scalar max_logit = -std::numeric_limits<Scalar>::infinity();
        for (std::size_t j = 0; j < len; ++j) {
          const Scalar* kj = kv.row(base + j) + off;
          Scalar s = 0;
          for (std::size_t c = 0; c < d; ++c) s += qi[c] * kj[c];
          Pi[j] = s * scale;
          max_logit = std::max(max_logit, Pi[j]);
        }
        Scalar total = 0;
        for (std::size_t j = 0; j < len; ++j) {
          Pi[j] = std::exp(Pi[j] - max_logit);
          total += Pi[j];
        }
        const Scalar inv = Scalar(1) / total;
        for (std::size_t j = 0; j < len; ++j) Pi[j] *= inv;
        Scalar* oi = out.row(base + i) + off;
        for (std::size_t j = 0; j < len; ++j) {
          const Scalar p = Pi[j];
          const Scalar* vj = vv.row(base + j) + off;
          for (std::size_t c = 0; c < d; ++c) oi[c] += p * vj[c];
        }
        if (g.trace) {
          double sum = 0;
          for (std::size_t j = 0; j < len; ++j) sum += Pi[j];
          g.trace->attention_rows++;
          g.trace->max_attention_row_error = std::max(g.trace->max_attention_row_error, std::fabs(sum - 1.0));
        }
      }
    }
  }
  if (g.trace && g.trace->keep_attention) g.trace->attention.push_back(*probs);

  auto lens = std::make_shared<std::vector<std::size_t>>(lengths.begin(), lengths.end());
  return g.record(std::move(out), {q, k, v}, [q, k, v, probs, lens, heads, L, d, scale, width](Graph& g,
                                                                                           const Tensor& dy) {
    const Tensor& qv = g.value(q);
    const Tensor& kv = g.value(k);
    const Tensor& vv = g.value(v);
    Tensor* dq = g.requires_grad(q) ? &g.grad(q) : nullptr;
    Tensor* dk = g.requires_grad(k) ? &g.grad(k) : nullptr;
    Tensor* dv = g.requires_grad(v) ? &g.grad(v) : nullptr;
    std::vector<Scalar> dP(L);
    for (std::size_t b = 0; b < lens->size(); ++b) {
      const std::size_t len = (*lens)[b];
      const std::size_t base = b * L;
      for (std::size_t h = 0; h < heads; ++h) {
        const Scalar* P = probs->data() + (b * heads + h) * L * L;
        const std::size_t off = h * d;
        for (std::size_t i = 0; i < len; ++i) {
          const Scalar* Pi = P + i * L;
          const Scalar* doi = dy.row(base + i) + off;
          Scalar weighted = 0;
          for (std::size_t j = 0; j < len; ++j) {
            const Scalar* vj = vv.row(base + j) + off;
            Scalar s = 0;
            for (std::size_t c = 0; c < d; ++c) s += doi[c] * vj[c];
            dP[j] = s;
            weighted += Pi[j] * s;
            if (dv) {
              Scalar* dvj = dv->row(base + j) + off;
              for (std::size_t c = 0; c < d; ++c) dvj[c] += Pi[j] * doi[c];
            }
          }
          const Scalar* qi = qv.row(base + i) + off;
          Scalar* dqi = dq ? dq->row(base + i) + off : nullptr;
          for (std::size_t j = 0; j < len; ++j) {
            const Scalar ds = Pi[j] * (dP[j] - weighted) * scale;
            if (ds == 0) continue;
            const Scalar* kj = kv.row(base + j) + off;
            if (dqi) {
              for (std::size_t c = 0; c < d; ++c) dqi[c] += ds * kj[c];
            }
            if (dk) {
              Scalar* dkj = dk->row(base + j) + off;
              for (std::size_t c = 0; c < d; ++c) dkj[c] += ds * qi[c];
            }
          }
        }
      }
    }
    (void)width;
  });
}

Var mse(Graph& g, Var predictions, std::span<const Scalar> targets) {
  const Tensor& pv = g.value(predictions);
  require(pv.size() == targets.size(), "mse: length mismatch");
  require(!targets.empty(), "mse: empty input");
  const std::size_t n = targets.size();
  Scalar total = 0;
  for (std::size_t i = 0; i < n; ++i) total += (pv[i] - targets[i]) * (pv[i] - targets[i]);
  Tensor out = Tensor::vector(1, total / static_cast<Scalar>(n));
  auto ys = std::make_shared<std::vector<Scalar>>(targets.begin(), targets.end());
  return g.record(std::move(out), {predictions}, [predictions, ys, n](Graph& g, const Tensor& dy) {
    const Tensor& pv = g.value(predictions);
    Tensor& dp = g.grad(predictions);
    const Scalar coef = Scalar(2) * dy[0] / static_cast<Scalar>(n);
    for (std::size_t i = 0; i < n; ++i) dp[i] += coef * (pv[i] - (*ys)[i]);
  });
}

}  // namespace ops
}  // namespace coursecue
