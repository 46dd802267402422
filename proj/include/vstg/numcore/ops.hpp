// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vstg/numcore/autograd.hpp"
#include "vstg/numcore/rng.hpp"

namespace vstg {

inline constexpr double kLayerNormEps = 1e-5;

// Dense kernels on plain tensors (no graph).
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

// Linear algebra.
Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
/// x @ w + b, with b a 1 x n row broadcast over rows.
Var affine(const Var& x, const Var& w, const Var& b);

// Elementwise.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
/// a + row, row being 1 x n broadcast over a's rows.
Var add_row(const Var& a, const Var& row);
Var scale(const Var& a, double c);
Var add_scalar(const Var& a, double c);
/// a * s for a learnable 1x1 scalar s.
Var mul_scalar(const Var& a, const Var& s);
Var sigmoid(const Var& a);
Var tanh(const Var& a);
Var relu(const Var& a);

/// Max-subtracted softmax along `axis` of a tensor of any rank.
Var softmax(const Var& x, std::size_t axis);
inline Var softmax(const Var& x) { return softmax(x, x.shape().empty() ? 0 : x.shape().size() - 1); }
Tensor softmax(const Tensor& x);
/// Row-wise log-softmax of a rank-2 tensor.
Var log_softmax(const Var& x);

/// Normalizes every last-axis slice to zero mean and unit variance (biased
/// variance, eps inside the square root), then applies gain and bias.
Var layernorm(const Var& x, const Var& gain, const Var& bias, double eps = kLayerNormEps);

// Reductions and reshaping.
Var mean_rows(const Var& x);  // T x d -> 1 x d
Var sum(const Var& x);        // -> 1 x 1
Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
Var slice_cols(const Var& x, std::size_t begin, std::size_t end);
Var slice_rows(const Var& x, std::size_t begin, std::size_t end);
Var broadcast_rows(const Var& row, std::size_t n);
Var select_row(const Var& x, std::size_t r);

/// Row vector of weights that is the softmax over the k largest entries of
/// `logits` (1 x N) and exactly zero elsewhere. Ties for the k-th place are
/// resolved toward the lowest index.
Var topk_softmax(const Var& logits, std::size_t k);

/// Inverted dropout. Identity when rate == 0.
Var dropout(const Var& x, double rate, Rng& rng);

/// Indices of the k largest entries of `row`, ordered by descending value,
/// ties toward the lowest index.
std::vector<std::size_t> topk_indices(std::span<const double> row, std::size_t k);
std::size_t argmax(std::span<const double> row);

}  // namespace vstg
