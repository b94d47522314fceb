#include "ccsp/baseline.hpp"

#include <fmt/format.h>

#include "ccsp/csp.hpp"
#include "ccsp/error.hpp"

namespace ccsp::eval {

CspLdaBaseline CspLdaBaseline::fit(std::span<const double> samples, std::size_t n, std::size_t c, std::size_t t,
                                   std::span<const int> labels) {
  const auto cov = csp::class_covariances(samples, n, c, t, labels);
  CspLdaBaseline b;
  b.channels = c;
  b.timepoints = t;
  b.w_r = csp::reduce_projection(csp::solve_csp(cov.sigma1, cov.sigma0, cov.ridge).w);
  b.lda = lda::fit(csp::spatial_filter_features(samples, n, c, t, b.w_r), labels);
  return b;
}

Matrix CspLdaBaseline::features(std::span<const double> samples, std::size_t n) const {
  return csp::spatial_filter_features(samples, n, channels, timepoints, w_r);
}

std::vector<int> CspLdaBaseline::predict(std::span<const double> samples, std::size_t n) const {
  return lda::predict(lda, features(samples, n));
}

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size() || truth.empty()) {
    throw_invalid(fmt::format("accuracy: {} predictions for {} labels", predicted.size(), truth.size()));
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

}  // namespace ccsp::eval
