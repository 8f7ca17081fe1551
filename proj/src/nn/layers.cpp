#include "retweet/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "retweet/errors.hpp"

namespace retweet::nn {

namespace {

void require_rank(const Tensor& t, std::size_t rank, const char* what) {
  if (t.rank() != rank)
    throw DimensionError(std::string(what) + " must have rank " + std::to_string(rank) +
                         ", got " + shape_str(t.shape()));
}

[[noreturn]] void mismatch(const char* op, const Tensor& a, const Tensor& b) {
  throw DimensionError(std::string(op) + ": incompatible shapes " + shape_str(a.shape()) +
                       " and " + shape_str(b.shape()));
}

// Valid output positions t for tap k: 0 <= t + k - pad < length.
struct TapRange {
  std::size_t begin;
  std::size_t end;
};

TapRange tap_range(std::size_t k, std::size_t pad, std::size_t length, std::size_t out_len) {
  const std::size_t begin = pad > k ? pad - k : 0;
  const std::size_t limit = length + pad > k ? length + pad - k : 0;
  return {begin, std::min(out_len, limit)};
}

void check_conv(const Tensor& input, const Tensor& filters, std::size_t pad) {
  require_rank(input, 2, "conv1d input");
  require_rank(filters, 3, "conv1d filters");
  if (filters.dim(1) != input.dim(0)) mismatch("conv1d_wide", input, filters);
  if (filters.dim(2) > input.dim(1) + 2 * pad)
    throw DimensionError("conv1d_wide: filter width " + std::to_string(filters.dim(2)) +
                         " exceeds padded length " + std::to_string(input.dim(1) + 2 * pad));
}

}  // namespace

std::size_t conv_output_length(std::size_t length, std::size_t width, std::size_t pad) {
  if (width > length + 2 * pad)
    throw DimensionError("filter width " + std::to_string(width) + " exceeds padded length " +
                         std::to_string(length + 2 * pad));
  return length + 2 * pad - width + 1;
}

Tensor conv1d_wide(const Tensor& input, const Tensor& filters, std::size_t pad) {
  check_conv(input, filters, pad);
  const std::size_t c_out = filters.dim(0), c_in = filters.dim(1), width = filters.dim(2);
  const std::size_t length = input.dim(1);
  const std::size_t out_len = conv_output_length(length, width, pad);

  Tensor out({c_out, out_len});
  for (std::size_t o = 0; o < c_out; ++o) {
    double* y = out.row(o).data();
    for (std::size_t c = 0; c < c_in; ++c) {
      const double* x = input.row(c).data();
      for (std::size_t k = 0; k < width; ++k) {
        const double w = filters.at(o, c, k);
        const auto [t0, t1] = tap_range(k, pad, length, out_len);
        for (std::size_t t = t0; t < t1; ++t) y[t] += w * x[t + k - pad];
      }
    }
  }
  return out;
}

ConvGrads conv1d_backward(const Tensor& input, const Tensor& filters, std::size_t pad,
                          const Tensor& upstream) {
  check_conv(input, filters, pad);
  const std::size_t c_out = filters.dim(0), c_in = filters.dim(1), width = filters.dim(2);
  const std::size_t length = input.dim(1);
  const std::size_t out_len = conv_output_length(length, width, pad);
  if (upstream.shape() != Shape{c_out, out_len}) mismatch("conv1d_backward", upstream, filters);

  ConvGrads g{Tensor(input.shape()), Tensor(filters.shape())};
  for (std::size_t o = 0; o < c_out; ++o) {
    const double* dy = upstream.row(o).data();
    for (std::size_t c = 0; c < c_in; ++c) {
      const double* x = input.row(c).data();
      double* dx = g.input.row(c).data();
      for (std::size_t k = 0; k < width; ++k) {
        const double w = filters.at(o, c, k);
        const auto [t0, t1] = tap_range(k, pad, length, out_len);
        double acc = 0.0;
        for (std::size_t t = t0; t < t1; ++t) {
          acc += dy[t] * x[t + k - pad];
          dx[t + k - pad] += w * dy[t];
        }
        g.filters.at(o, c, k) += acc;
      }
    }
  }
  return g;
}

KMaxResult kmax_pool(const Tensor& input, std::size_t k) {
  require_rank(input, 2, "kmax_pool input");
  const std::size_t rows = input.dim(0), length = input.dim(1);
  if (k == 0 || k > length)
    throw PoolingError("kmax_pool: k=" + std::to_string(k) + " not in [1, " +
                       std::to_string(length) + "]");

  KMaxResult result{Tensor({rows, k}), std::vector<std::size_t>(rows * k)};
  std::vector<std::size_t> order(length);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto values = input.row(r);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        return values[a] > values[b] || (values[a] == values[b] && a < b);
                      });
    std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    for (std::size_t j = 0; j < k; ++j) {
      result.indices[r * k + j] = order[j];
      result.output.at(r, j) = values[order[j]];
    }
  }
  return result;
}

Tensor kmax_backward(std::span<const std::size_t> indices, const Tensor& upstream,
                     std::size_t original_length) {
  require_rank(upstream, 2, "kmax_backward upstream");
  if (indices.size() != upstream.size())
    throw DimensionError("kmax_backward: " + std::to_string(indices.size()) +
                         " indices for upstream " + shape_str(upstream.shape()));
  const std::size_t rows = upstream.dim(0), k = upstream.dim(1);
  Tensor grad({rows, original_length});
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t idx = indices[r * k + j];
      if (idx >= original_length)
        throw Error("kmax_backward: internal index " + std::to_string(idx) + " out of range");
      grad.at(r, idx) += upstream.at(r, j);
    }
  }
  return grad;
}

Tensor fold(const Tensor& input) {
  require_rank(input, 2, "fold input");
  const std::size_t rows = input.dim(0), length = input.dim(1);
  if (rows % 2 != 0)
    throw FoldError("fold: row count " + std::to_string(rows) + " is odd");
  Tensor out({rows / 2, length});
  for (std::size_t i = 0; i < rows / 2; ++i) {
    const auto a = input.row(2 * i), b = input.row(2 * i + 1);
    auto y = out.row(i);
    for (std::size_t t = 0; t < length; ++t) y[t] = a[t] + b[t];
  }
  return out;
}

Tensor fold_backward(const Tensor& upstream) {
  require_rank(upstream, 2, "fold_backward upstream");
  const std::size_t rows = upstream.dim(0), length = upstream.dim(1);
  Tensor grad({2 * rows, length});
  for (std::size_t i = 0; i < rows; ++i) {
    const auto dy = upstream.row(i);
    std::copy(dy.begin(), dy.end(), grad.row(2 * i).begin());
    std::copy(dy.begin(), dy.end(), grad.row(2 * i + 1).begin());
  }
  return grad;
}

Activation parse_activation(std::string_view name) {
  if (name == "tanh") return Activation::tanh;
  if (name == "relu") return Activation::relu;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

std::string_view activation_name(Activation kind) {
  return kind == Activation::tanh ? "tanh" : "relu";
}

Tensor activation(const Tensor& input, Activation kind) {
  Tensor out = input;
  for (auto& v : out.data()) v = kind == Activation::tanh ? std::tanh(v) : std::max(v, 0.0);
  return out;
}

Tensor activation_backward(const Tensor& input, const Tensor& upstream, Activation kind) {
  if (input.shape() != upstream.shape()) mismatch("activation_backward", input, upstream);
  Tensor grad(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i) {
    if (kind == Activation::tanh) {
      const double y = std::tanh(input[i]);
      grad[i] = upstream[i] * (1.0 - y * y);
    } else {
      grad[i] = input[i] > 0.0 ? upstream[i] : 0.0;
    }
  }
  return grad;
}

Tensor dense(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  require_rank(weights, 2, "dense weights");
  const std::size_t m = weights.dim(0), n = weights.dim(1);
  if (input.size() != n) mismatch("dense", input, weights);
  if (bias.size() != m) mismatch("dense", bias, weights);
  Tensor out({m});
  const auto x = input.data();
  for (std::size_t i = 0; i < m; ++i) {
    const auto w = weights.row(i);
    double acc = bias[i];
    for (std::size_t j = 0; j < n; ++j) acc += w[j] * x[j];
    out[i] = acc;
  }
  return out;
}

DenseGrads dense_backward(const Tensor& input, const Tensor& weights, const Tensor& upstream) {
  require_rank(weights, 2, "dense weights");
  const std::size_t m = weights.dim(0), n = weights.dim(1);
  if (input.size() != n) mismatch("dense_backward", input, weights);
  if (upstream.size() != m) mismatch("dense_backward", upstream, weights);
  DenseGrads g{Tensor(input.shape()), Tensor(weights.shape()), Tensor({m})};
  const auto x = input.data();
  for (std::size_t i = 0; i < m; ++i) {
    const double dy = upstream[i];
    const auto w = weights.row(i);
    auto dw = g.weights.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      dw[j] = dy * x[j];
      g.input[j] += dy * w[j];
    }
    g.bias[i] = dy;
  }
  return g;
}

Tensor add_row_bias(const Tensor& input, const Tensor& bias) {
  require_rank(input, 2, "add_row_bias input");
  if (bias.size() != input.dim(0)) mismatch("add_row_bias", input, bias);
  Tensor out = input;
  for (std::size_t r = 0; r < out.dim(0); ++r)
    for (auto& v : out.row(r)) v += bias[r];
  return out;
}

Tensor row_bias_backward(const Tensor& upstream) {
  require_rank(upstream, 2, "row_bias_backward upstream");
  Tensor grad({upstream.dim(0)});
  for (std::size_t r = 0; r < upstream.dim(0); ++r) {
    const auto row = upstream.row(r);
    grad[r] = std::accumulate(row.begin(), row.end(), 0.0);
  }
  return grad;
}

Tensor embedding_lookup(std::span<const std::size_t> ids, const Tensor& table) {
  require_rank(table, 2, "embedding table");
  if (ids.empty()) throw DimensionError("embedding_lookup: empty id sequence");
  const std::size_t vocab = table.dim(0), d = table.dim(1), len = ids.size();
  Tensor out({d, len});
  for (std::size_t t = 0; t < len; ++t) {
    if (ids[t] >= vocab)
      throw LookupError("embedding_lookup: id " + std::to_string(ids[t]) +
                        " out of range for vocabulary of " + std::to_string(vocab));
    const auto e = table.row(ids[t]);
    for (std::size_t j = 0; j < d; ++j) out.at(j, t) = e[j];
  }
  return out;
}

void embedding_backward(std::span<const std::size_t> ids, const Tensor& upstream,
                        Tensor& table_grad) {
  require_rank(table_grad, 2, "embedding table gradient");
  const std::size_t vocab = table_grad.dim(0), d = table_grad.dim(1);
  if (upstream.shape() != Shape{d, ids.size()}) mismatch("embedding_backward", upstream, table_grad);
  for (std::size_t t = 0; t < ids.size(); ++t) {
    if (ids[t] >= vocab)
      throw LookupError("embedding_backward: id " + std::to_string(ids[t]) + " out of range");
    auto g = table_grad.row(ids[t]);
    for (std::size_t j = 0; j < d; ++j) g[j] += upstream.at(j, t);
  }
}

namespace {

void check_rnn(const Tensor& inputs, const Tensor& w_xh, const Tensor& w_hh, const Tensor& bias) {
  require_rank(inputs, 2, "rnn inputs");
  require_rank(w_xh, 2, "rnn w_xh");
  require_rank(w_hh, 2, "rnn w_hh");
  const std::size_t hidden = w_xh.dim(0);
  if (w_xh.dim(1) != inputs.dim(0)) mismatch("rnn_forward", inputs, w_xh);
  if (w_hh.dim(0) != hidden || w_hh.dim(1) != hidden) mismatch("rnn_forward", w_xh, w_hh);
  if (bias.size() != hidden) mismatch("rnn_forward", w_xh, bias);
}

double apply(Activation kind, double a) { return kind == Activation::tanh ? std::tanh(a) : std::max(a, 0.0); }

double derivative(Activation kind, double a, double h) {
  return kind == Activation::tanh ? 1.0 - h * h : (a > 0.0 ? 1.0 : 0.0);
}

}  // namespace

RnnState rnn_forward(const Tensor& inputs, const Tensor& w_xh, const Tensor& w_hh,
                     const Tensor& bias, Activation kind) {
  check_rnn(inputs, w_xh, w_hh, bias);
  const std::size_t hidden = w_xh.dim(0), d_in = inputs.dim(0), steps = inputs.dim(1);
  RnnState state{Tensor({hidden, steps}), Tensor({hidden, steps})};
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t i = 0; i < hidden; ++i) {
      double a = bias[i];
      for (std::size_t j = 0; j < d_in; ++j) a += w_xh.at(i, j) * inputs.at(j, t);
      if (t > 0)
        for (std::size_t j = 0; j < hidden; ++j) a += w_hh.at(i, j) * state.hidden.at(j, t - 1);
      state.pre_activation.at(i, t) = a;
      state.hidden.at(i, t) = apply(kind, a);
    }
  }
  return state;
}

RnnGrads rnn_backward(const Tensor& inputs, const Tensor& w_xh, const Tensor& w_hh,
                      const RnnState& state, const Tensor& upstream, Activation kind) {
  check_rnn(inputs, w_xh, w_hh, Tensor({w_xh.dim(0)}));
  const std::size_t hidden = w_xh.dim(0), d_in = inputs.dim(0), steps = inputs.dim(1);
  if (upstream.shape() != state.hidden.shape() || state.hidden.shape() != Shape{hidden, steps})
    mismatch("rnn_backward", upstream, state.hidden);

  RnnGrads g{Tensor(inputs.shape()), Tensor(w_xh.shape()), Tensor(w_hh.shape()),
             Tensor({hidden})};
  std::vector<double> carry(hidden, 0.0);  // dL/dh_t flowing back from step t+1
  std::vector<double> da(hidden);
  for (std::size_t t = steps; t-- > 0;) {
    for (std::size_t i = 0; i < hidden; ++i) {
      const double dh = upstream.at(i, t) + carry[i];
      da[i] = dh * derivative(kind, state.pre_activation.at(i, t), state.hidden.at(i, t));
      g.bias[i] += da[i];
    }
    for (std::size_t i = 0; i < hidden; ++i) {
      for (std::size_t j = 0; j < d_in; ++j) {
        g.w_xh.at(i, j) += da[i] * inputs.at(j, t);
        g.inputs.at(j, t) += w_xh.at(i, j) * da[i];
      }
    }
    std::fill(carry.begin(), carry.end(), 0.0);
    if (t > 0) {
      for (std::size_t i = 0; i < hidden; ++i) {
        for (std::size_t j = 0; j < hidden; ++j) {
          g.w_hh.at(i, j) += da[i] * state.hidden.at(j, t - 1);
          carry[j] += w_hh.at(i, j) * da[i];
        }
      }
    }
  }
  return g;
}

}  // namespace retweet::nn
