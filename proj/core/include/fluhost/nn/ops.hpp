#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fluhost/nn/graph.hpp"

namespace fluhost::nn {

// y = xW + b over the last axis of x; x is (..., in), W (in, out), b (out).
Var dense(const Var& x, const Var& W, const Var& b);

Var relu(const Var& x);

Var add(const Var& a, const Var& b);

// Softmax over the last axis.
Var softmax(const Var& x);

// Mean negative log-likelihood of `labels` under softmax(logits); logits (N, C).
Var softmax_cross_entropy(const Var& logits, std::span<const int> labels);

// ids laid out (batch, seq_len); table (vocab, dim) -> (batch, seq_len, dim).
Var embedding(std::span<const int> ids, std::size_t batch, std::size_t seq_len, const Var& table);

// Valid 1-d convolution along axis 1: x (B, T, Cin), filters (K, Cin, Cout),
// bias (Cout) -> (B, T - K + 1, Cout).
Var conv1d(const Var& x, const Var& filters, const Var& bias);

// Non-overlapping max pooling along axis 1 with stride = width; trailing
// positions that do not fill a window are dropped.
Var maxpool1d(const Var& x, std::size_t width);

// softmax(Q K^T / sqrt(d_k)) V for Q (B, Tq, dk), K (B, Tk, dk), V (B, Tk, dv).
Var scaled_dot_product_attention(const Var& Q, const Var& K, const Var& V);

// The (B, Tq, Tk) weight tensor used by scaled_dot_product_attention.
Tensor attention_weights(const Tensor& Q, const Tensor& K);

struct AttentionParams {
    Var wq, bq, wk, bk, wv, bv, wo, bo;  // each W (D, D), b (D)
};

// Per-head projections of width D / num_heads, concatenated heads, output projection.
Var multi_head_attention(const Var& x, const AttentionParams& p, std::size_t num_heads);

// Normalizes each vector along the last axis, then scales and shifts.
Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps = 1e-5);

// Mean over axis 1: (B, T, D) -> (B, D).
Var mean_pool(const Var& x);

Var reshape(const Var& x, Shape shape);

// Columns [offset, offset + width) of the last axis.
Var slice_last(const Var& x, std::size_t offset, std::size_t width);
Var concat_last(const std::vector<Var>& parts);

// sum(x * weights) as a one-element tensor; weights are constants.
Var weighted_sum(const Var& x, const Tensor& weights);

}  // namespace fluhost::nn
