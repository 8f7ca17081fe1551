#pragma once

// Forward and analytic backward passes for the regressors' building blocks.
// Sequences are laid out as (channels x length) matrices: one row per feature
// channel, one column per position.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "retweet/tensor.hpp"

namespace retweet::nn {

// Zero-padded cross-correlation over the length axis.
//   input   (channels_in x length)
//   filters (channels_out x channels_in x width)
//   output  (channels_out x (length + 2*pad - width + 1))
// output[o][t] = sum_{c,k} filters[o][c][k] * padded[c][t + k]
Tensor conv1d_wide(const Tensor& input, const Tensor& filters, std::size_t pad);

struct ConvGrads {
  Tensor input;
  Tensor filters;
};

ConvGrads conv1d_backward(const Tensor& input, const Tensor& filters, std::size_t pad,
                          const Tensor& upstream);

std::size_t conv_output_length(std::size_t length, std::size_t width, std::size_t pad);

struct KMaxResult {
  Tensor output;                     // rows x k
  std::vector<std::size_t> indices;  // rows x k, column index of each kept value
};

// Keeps the k largest values of each row in their original left-to-right
// order. Among equal values the one with the smaller index wins.
KMaxResult kmax_pool(const Tensor& input, std::size_t k);

Tensor kmax_backward(std::span<const std::size_t> indices, const Tensor& upstream,
                     std::size_t original_length);

// Sums adjacent row pairs: output[i] = input[2i] + input[2i+1].
Tensor fold(const Tensor& input);
Tensor fold_backward(const Tensor& upstream);

enum class Activation { tanh, relu };

Activation parse_activation(std::string_view name);
std::string_view activation_name(Activation kind);

Tensor activation(const Tensor& input, Activation kind);
// Uses g'(input); relu takes subgradient 0 at exactly 0.
Tensor activation_backward(const Tensor& input, const Tensor& upstream, Activation kind);

// weights (m x n) . input (n) + bias (m)
Tensor dense(const Tensor& input, const Tensor& weights, const Tensor& bias);

struct DenseGrads {
  Tensor input;
  Tensor weights;
  Tensor bias;
};

DenseGrads dense_backward(const Tensor& input, const Tensor& weights, const Tensor& upstream);

// Adds bias[r] to every element of row r.
Tensor add_row_bias(const Tensor& input, const Tensor& bias);
Tensor row_bias_backward(const Tensor& upstream);

// Column t of the (d x len) output is row ids[t] of the (vocab x d) table.
Tensor embedding_lookup(std::span<const std::size_t> ids, const Tensor& table);

// Accumulates upstream column t into table_grad row ids[t]. Repeated ids add up.
void embedding_backward(std::span<const std::size_t> ids, const Tensor& upstream,
                        Tensor& table_grad);

// Hidden states h_1..h_T as columns of an (H x T) matrix, plus the
// pre-activations needed for the backward pass. h_0 is zero.
struct RnnState {
  Tensor hidden;
  Tensor pre_activation;
};

// h_t = g(w_xh . x_t + w_hh . h_{t-1} + b), inputs are the columns of (d_in x T).
RnnState rnn_forward(const Tensor& inputs, const Tensor& w_xh, const Tensor& w_hh,
                     const Tensor& bias, Activation kind = Activation::tanh);

struct RnnGrads {
  Tensor inputs;
  Tensor w_xh;
  Tensor w_hh;
  Tensor bias;
};

// Backpropagation through the full unroll. upstream is dL/dh_t for every t.
RnnGrads rnn_backward(const Tensor& inputs, const Tensor& w_xh, const Tensor& w_hh,
                      const RnnState& state, const Tensor& upstream,
                      Activation kind = Activation::tanh);

}  // namespace retweet::nn
