#pragma once

#include <span>
#include <vector>

#include "ccsp/lda.hpp"
#include "ccsp/linalg.hpp"

namespace ccsp::eval {

// Plain CSP + LDA on the pre-processed channels: one filter set (first two and
// last two generalized eigenvectors), log-variance features, Fisher LDA.
struct CspLdaBaseline {
  Matrix w_r;  // C x 4
  lda::LdaModel lda;
  std::size_t channels = 0;
  std::size_t timepoints = 0;

  static CspLdaBaseline fit(std::span<const double> samples, std::size_t n, std::size_t c, std::size_t t,
                            std::span<const int> labels);
  Matrix features(std::span<const double> samples, std::size_t n) const;
  std::vector<int> predict(std::span<const double> samples, std::size_t n) const;
};

double accuracy(std::span<const int> predicted, std::span<const int> truth);

}  // namespace ccsp::eval
