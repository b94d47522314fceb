#pragma once

#include <span>
#include <vector>

#include "ccsp/graph.hpp"
#include "ccsp/linalg.hpp"

namespace ccsp::ad {

// Depthwise "same" convolution (cross-correlation) along the last axis.
// x: N x Kin x C x T with Kin equal to 1 (broadcast to every kernel) or K;
// kernels: K x k; bias: K or undefined. Output N x K x C x T. Zero padding
// puts (k-1)/2 samples before the signal and the rest after.
Var conv_temporal(const Var& x, const Var& kernels, const Var& bias = {});

enum class BnMode { train, eval };

// Running statistics of one batch-norm layer.
struct BatchNormStats {
  Tensor mean;
  Tensor var;
  double momentum = 0.1;
  double eps = 1e-5;

  static BatchNormStats init(std::size_t features);
};

// Normalizes per feature along axis 1 of a rank-2 (N x F) or rank-4
// (N x F x C x T) input. Train mode uses batch statistics and updates `stats`
// (running variance uses the unbiased estimate); eval mode uses `stats`.
Var batch_norm(const Var& x, const Var& gamma, const Var& beta, BatchNormStats& stats, BnMode mode);

// x (N x d_in) * w (d_in x d_out) + b (d_out, optional).
Var dense(const Var& x, const Var& w, const Var& b = {});

// Max-subtracted softmax over the last axis.
Var softmax(const Var& x);

// Natural log of the population variance over the last axis.
Var log_variance(const Var& x);

// E[n,k] = W_k^T X[n,k] for x: N x K x C x T and K constant C x m matrices.
Var spatial_project(const Var& x, std::span<const Matrix> filters);

Var reshape(const Var& x, Shape shape);
Var add(const Var& a, const Var& b);
Var scale(const Var& a, double s);

// Mean over the leading axis of the summed element-wise binary cross-entropy,
// probabilities clamped to [1e-12, 1 - 1e-12].
Var binary_cross_entropy(const Var& p, const Tensor& target);

// Mean negative log-likelihood of softmax(logits) at the given labels.
Var softmax_cross_entropy(const Var& logits, std::span<const int> labels);

// (var(g | y=0) + var(g | y=1)) / (mean(g | y=0) - mean(g | y=1))^2 with
// population variances. g must hold N values.
Var fisher_criterion(const Var& g, std::span<const int> labels);

// K x 3 rows of (f, h, c) -> K x kernel_len real Morlet kernels.
Var morlet_bank(const Var& params, int kernel_len, double fs);

}  // namespace ccsp::ad
