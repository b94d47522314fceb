#pragma once

#include <span>
#include <vector>

#include "ccsp/graph.hpp"
#include "ccsp/linalg.hpp"

namespace ccsp::csp {

inline constexpr int kFeaturesPerBranch = 4;

// Trace-normalized class covariances. `ridge` is the Tikhonov term meant for
// the composite sigma0 + sigma1 (1e-6 * trace(composite) / C).
struct ClassCovariances {
  Matrix sigma0;
  Matrix sigma1;
  double ridge = 0.0;
};

// Streams trials into per-class sums of trace-normalized covariances.
class CovarianceAccumulator {
 public:
  explicit CovarianceAccumulator(std::size_t channels);
  // batch: n x C x T row-major.
  void add(std::span<const double> batch, std::size_t n, std::size_t t, std::span<const int> labels);
  ClassCovariances result() const;

 private:
  std::size_t channels_;
  Matrix acc_[2];
  double counts_[2] = {0.0, 0.0};
  std::size_t seen_ = 0;
};

// batch: N x C x T samples (one feature map). Each trial contributes
// X X^T / trace(X X^T); trials are averaged within their class.
ClassCovariances class_covariances(std::span<const double> batch, std::size_t n, std::size_t c, std::size_t t,
                                   std::span<const int> labels);
// Same, for map `branch` of an N x K x C x T tensor.
ClassCovariances class_covariances(const ad::Tensor& maps, std::size_t branch, std::span<const int> labels);

struct CspSolution {
  Matrix w;            // C x C, columns are generalized eigenvectors
  Vector eigenvalues;  // descending, in [0, 1]
};

// Solves a * w = lambda * (a + b + ridge * I) * w by Cholesky whitening of the
// composite followed by a symmetric eigendecomposition. Columns are sorted by
// descending lambda and signed so that each column's largest-magnitude entry
// is positive. W^T (a + b + ridge I) W = I.
CspSolution solve_csp(const Matrix& a, const Matrix& b, double ridge = 0.0);

// Columns 1, 2, C-1, C of W (1-based).
Matrix reduce_projection(const Matrix& w);

// One CSP branch fitted on a batch. The projection is ordered so that its
// leading columns carry the most variance for label-1 trials, which is where
// the loss target puts its ones.
struct CspBranch {
  Matrix sigma0;
  Matrix sigma1;
  Matrix w;
  Vector eigenvalues;
  Matrix w_r;
};

CspBranch fit_branch(const ad::Tensor& maps, std::size_t branch, std::span<const int> labels);

// log(var(W_r^T X)) per trial for a single N x C x T batch -> N x m.
Matrix spatial_filter_features(std::span<const double> batch, std::size_t n, std::size_t c, std::size_t t,
                               const Matrix& w_r);

// Differentiable version over all K maps: N x K x C x T -> N x K x m, with the
// filters held constant.
ad::Var spatial_filter_features(const ad::Var& maps, std::span<const Matrix> filters);

// Per-trial targets: label 1 -> [1,1,0,0], label 0 -> [0,0,1,1], repeated for
// each of `branches`. Shape N x branches x 4.
ad::Tensor loss_targets(std::span<const int> labels, std::size_t branches);

// Cross-entropy between softmax(v) and the target vector, summed over the four
// entries and all branches, averaged over trials. features: N x K x 4.
ad::Var csp_loss(const ad::Var& features, std::span<const int> labels);

}  // namespace ccsp::csp
