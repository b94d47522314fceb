#include "ccsp/lda.hpp"

#include <cmath>

#include <fmt/format.h>

#include "ccsp/error.hpp"

namespace ccsp::lda {

LdaModel fit(const Matrix& features, std::span<const int> labels) {
  const Eigen::Index n = features.rows(), d = features.cols();
  if (static_cast<std::size_t>(n) != labels.size()) {
    throw_invalid(fmt::format("lda::fit: {} labels for {} rows", labels.size(), n));
  }
  Vector mean[2] = {Vector::Zero(d), Vector::Zero(d)};
  double count[2] = {0.0, 0.0};
  for (Eigen::Index i = 0; i < n; ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y != 0 && y != 1) throw_invalid(fmt::format("lda::fit: label {} is not binary", y));
    mean[y] += features.row(i).transpose();
    count[y] += 1.0;
  }
  if (count[0] == 0.0 || count[1] == 0.0) throw_invalid("lda::fit: both classes must be present");
  mean[0] /= count[0];
  mean[1] /= count[1];

  Matrix scatter = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector r = features.row(i).transpose() - mean[labels[static_cast<std::size_t>(i)]];
    scatter.noalias() += r * r.transpose();
  }
  const Vector gap = mean[1] - mean[0];
  if (gap.norm() == 0.0) throw_numerical("lda::fit: class means coincide");

  Vector w;
  const double tr = scatter.trace();
  if (tr == 0.0) {
    // No within-class spread: any direction along the mean gap separates.
    w = gap;
  } else {
    scatter.diagonal().array() += 1e-6 * tr / static_cast<double>(d);
    Eigen::LLT<Matrix> chol(scatter);
    if (chol.info() != Eigen::Success) throw_numerical("lda::fit: within-class scatter is singular");
    w = chol.solve(gap);
  }
  const double norm = w.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw_numerical("lda::fit: degenerate projection");
  w /= norm;
  if (w.dot(gap) < 0.0) w = -w;

  LdaModel model;
  model.w = w;
  model.mu0 = w.dot(mean[0]);
  model.mu1 = w.dot(mean[1]);
  if (model.mu0 == model.mu1) throw_numerical("lda::fit: projected class means coincide");
  model.fitted = true;
  return model;
}

double fisher_criterion(std::span<const double> g, std::span<const int> labels) {
  if (g.size() != labels.size()) throw_invalid("fisher_criterion: label count mismatch");
  double s[2] = {0.0, 0.0}, cnt[2] = {0.0, 0.0};
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw_invalid("fisher_criterion: labels must be 0 or 1");
    s[labels[i]] += g[i];
    cnt[labels[i]] += 1.0;
  }
  if (cnt[0] == 0.0 || cnt[1] == 0.0) throw_invalid("fisher_criterion: both classes must be present");
  const double mu[2] = {s[0] / cnt[0], s[1] / cnt[1]};
  double ss[2] = {0.0, 0.0};
  for (std::size_t i = 0; i < g.size(); ++i) ss[labels[i]] += (g[i] - mu[labels[i]]) * (g[i] - mu[labels[i]]);
  const double gap = mu[0] - mu[1];
  if (gap == 0.0) throw_numerical("fisher_criterion: class means coincide");
  return (ss[0] / cnt[0] + ss[1] / cnt[1]) / (gap * gap);
}

double combined_loss(double csp_loss, double fisher, double r) {
  if (!(r >= 0.0 && r <= 1.0)) throw_invalid(fmt::format("combined_loss: ratio {} outside [0, 1]", r));
  return r * csp_loss + (1.0 - r) * fisher;
}

Vector project(const LdaModel& model, const Matrix& features) {
  if (!model.fitted) throw_invalid("lda: model is not fitted");
  if (features.cols() != model.w.size()) {
    throw_invalid(fmt::format("lda: {} features for a {}-dimensional model", features.cols(), model.w.size()));
  }
  return features * model.w;
}

std::vector<int> predict(const LdaModel& model, const Matrix& features) {
  const Vector g = project(model, features);
  std::vector<int> out(static_cast<std::size_t>(g.size()));
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    out[static_cast<std::size_t>(i)] = std::abs(g(i) - model.mu1) < std::abs(g(i) - model.mu0) ? 1 : 0;
  }
  return out;
}

}  // namespace ccsp::lda
