#include "ccsp/csp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "ccsp/error.hpp"
#include "ccsp/ops.hpp"

namespace ccsp::csp {

namespace {

void check_labels(std::span<const int> labels, std::size_t n) {
  if (labels.size() != n) throw_invalid(fmt::format("csp: {} labels for {} trials", labels.size(), n));
  bool seen[2] = {false, false};
  for (int y : labels) {
    if (y != 0 && y != 1) throw_invalid(fmt::format("csp: label {} is not binary", y));
    seen[y] = true;
  }
  if (!seen[0] || !seen[1]) throw_invalid("csp: both classes must be present in the batch");
}

}  // namespace

CovarianceAccumulator::CovarianceAccumulator(std::size_t channels) : channels_(channels) {
  const auto ci = static_cast<Eigen::Index>(channels);
  acc_[0] = Matrix::Zero(ci, ci);
  acc_[1] = Matrix::Zero(ci, ci);
}

void CovarianceAccumulator::add(std::span<const double> batch, std::size_t n, std::size_t t,
                                std::span<const int> labels) {
  const std::size_t c = channels_;
  if (batch.size() != n * c * t) throw_invalid("class_covariances: batch size does not match N x C x T");
  if (t < 2) throw_invalid("class_covariances: need at least 2 time points");
  if (labels.size() != n) throw_invalid(fmt::format("csp: {} labels for {} trials", labels.size(), n));
  const auto ci = static_cast<Eigen::Index>(c), ti = static_cast<Eigen::Index>(t);
  Matrix cov(ci, ci);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = labels[i];
    if (y != 0 && y != 1) throw_invalid(fmt::format("csp: label {} is not binary", y));
    Eigen::Map<const RowMatrix> x(batch.data() + i * c * t, ci, ti);
    cov.setZero();
    cov.selfadjointView<Eigen::Lower>().rankUpdate(x);
    const double tr = cov.trace();
    if (!(tr > 0.0) || !std::isfinite(tr)) {
      throw_numerical(fmt::format("class_covariances: trial {} has zero or non-finite energy", seen_ + i));
    }
    acc_[y].triangularView<Eigen::Lower>() += cov / tr;
    counts_[y] += 1.0;
  }
  seen_ += n;
}

ClassCovariances CovarianceAccumulator::result() const {
  if (counts_[0] == 0.0 || counts_[1] == 0.0) throw_invalid("csp: both classes must be present in the batch");
  ClassCovariances out;
  out.sigma0 = Matrix(acc_[0].selfadjointView<Eigen::Lower>()) / counts_[0];
  out.sigma1 = Matrix(acc_[1].selfadjointView<Eigen::Lower>()) / counts_[1];
  out.ridge = 1e-6 * (out.sigma0.trace() + out.sigma1.trace()) / static_cast<double>(channels_);
  return out;
}

ClassCovariances class_covariances(std::span<const double> batch, std::size_t n, std::size_t c, std::size_t t,
                                   std::span<const int> labels) {
  check_labels(labels, n);
  CovarianceAccumulator acc(c);
  acc.add(batch, n, t, labels);
  return acc.result();
}

ClassCovariances class_covariances(const ad::Tensor& maps, std::size_t branch, std::span<const int> labels) {
  if (maps.rank() != 4) throw_invalid("class_covariances: expected an N x K x C x T tensor");
  const std::size_t n = maps.dim(0), k = maps.dim(1), c = maps.dim(2), t = maps.dim(3);
  if (branch >= k) throw_invalid(fmt::format("class_covariances: branch {} of {}", branch, k));
  std::vector<double> slice(n * c * t);
  for (std::size_t i = 0; i < n; ++i) {
    const double* src = maps.raw() + (i * k + branch) * c * t;
    std::copy(src, src + c * t, slice.data() + i * c * t);
  }
  return class_covariances(slice, n, c, t, labels);
}

CspSolution solve_csp(const Matrix& a, const Matrix& b, double ridge) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
    throw_invalid("solve_csp: covariances must be square and of equal size");
  }
  const Eigen::Index c = a.rows();
  Matrix composite = a + b;
  composite.diagonal().array() += ridge;
  Eigen::LLT<Matrix> chol(composite);
  if (chol.info() != Eigen::Success) throw_numerical("solve_csp: composite covariance is not positive definite");

  // M = L^-1 a L^-T
  const Matrix l_inv_a = chol.matrixL().solve(a);
  Matrix m = chol.matrixL().solve(l_inv_a.transpose());
  m = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
  if (eig.info() != Eigen::Success) throw_numerical("solve_csp: eigendecomposition failed");

  // W = L^-T U
  const Matrix w_all = chol.matrixU().solve(eig.eigenvectors());

  CspSolution out;
  out.w.resize(c, c);
  out.eigenvalues.resize(c);
  for (Eigen::Index j = 0; j < c; ++j) {
    const Eigen::Index src = c - 1 - j;  // ascending -> descending
    Vector col = w_all.col(src);
    Eigen::Index arg = 0;
    col.cwiseAbs().maxCoeff(&arg);
    if (col(arg) < 0.0) col = -col;
    out.w.col(j) = col;
    out.eigenvalues(j) = eig.eigenvalues()(src);
  }
  return out;
}

Matrix reduce_projection(const Matrix& w) {
  const Eigen::Index c = w.cols();
  if (c < kFeaturesPerBranch) {
    throw_invalid(fmt::format("reduce_projection: need at least 4 columns, got {}", c));
  }
  Matrix r(w.rows(), kFeaturesPerBranch);
  r.col(0) = w.col(0);
  r.col(1) = w.col(1);
  r.col(2) = w.col(c - 2);
  r.col(3) = w.col(c - 1);
  return r;
}

CspBranch fit_branch(const ad::Tensor& maps, std::size_t branch, std::span<const int> labels) {
  auto cov = class_covariances(maps, branch, labels);
  auto sol = solve_csp(cov.sigma1, cov.sigma0, cov.ridge);
  CspBranch out;
  out.w_r = reduce_projection(sol.w);
  out.sigma0 = std::move(cov.sigma0);
  out.sigma1 = std::move(cov.sigma1);
  out.w = std::move(sol.w);
  out.eigenvalues = std::move(sol.eigenvalues);
  return out;
}

Matrix spatial_filter_features(std::span<const double> batch, std::size_t n, std::size_t c, std::size_t t,
                               const Matrix& w_r) {
  if (batch.size() != n * c * t) throw_invalid("spatial_filter_features: batch size does not match N x C x T");
  if (static_cast<std::size_t>(w_r.rows()) != c) {
    throw_invalid(fmt::format("spatial_filter_features: filter has {} rows for {} channels", w_r.rows(), c));
  }
  const auto ci = static_cast<Eigen::Index>(c), ti = static_cast<Eigen::Index>(t);
  Matrix out(static_cast<Eigen::Index>(n), w_r.cols());
  RowMatrix e;
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::Map<const RowMatrix> x(batch.data() + i * c * t, ci, ti);
    e.noalias() = w_r.transpose() * x;
    for (Eigen::Index r = 0; r < e.rows(); ++r) {
      const double mu = e.row(r).mean();
      const double var = (e.row(r).array() - mu).square().mean();
      if (!(var > 0.0)) {
        throw_numerical(fmt::format("spatial_filter_features: trial {} row {} has zero variance", i, r));
      }
      out(static_cast<Eigen::Index>(i), r) = std::log(var);
    }
  }
  return out;
}

ad::Var spatial_filter_features(const ad::Var& maps, std::span<const Matrix> filters) {
  return ad::log_variance(ad::spatial_project(maps, filters));
}

ad::Tensor loss_targets(std::span<const int> labels, std::size_t branches) {
  const std::size_t n = labels.size();
  ad::Tensor y({n, branches, static_cast<std::size_t>(kFeaturesPerBranch)});
  for (std::size_t i = 0; i < n; ++i) {
    const double first = labels[i] == 1 ? 1.0 : 0.0;
    for (std::size_t k = 0; k < branches; ++k) {
      double* row = y.raw() + (i * branches + k) * kFeaturesPerBranch;
      row[0] = row[1] = first;
      row[2] = row[3] = 1.0 - first;
    }
  }
  return y;
}

ad::Var csp_loss(const ad::Var& features, std::span<const int> labels) {
  const auto& fv = features.value();
  if (fv.rank() != 3 || fv.dim(2) != kFeaturesPerBranch) {
    throw_invalid(fmt::format("csp_loss: expected N x K x 4 features, got {}", ad::shape_string(fv.shape())));
  }
  if (labels.size() != fv.dim(0)) throw_invalid("csp_loss: label count mismatch");
  for (int y : labels) {
    if (y != 0 && y != 1) throw_invalid(fmt::format("csp_loss: label {} is not binary", y));
  }
  return ad::binary_cross_entropy(ad::softmax(features), loss_targets(labels, fv.dim(1)));
}

}  // namespace ccsp::csp
