#pragma once

#include <span>
#include <vector>

#include "ccsp/linalg.hpp"

namespace ccsp::lda {

struct LdaModel {
  Vector w;          // unit norm
  double mu0 = 0.0;  // projected class means, mu1 > mu0
  double mu1 = 0.0;
  bool fitted = false;
};

// Closed-form two-class Fisher discriminant: w ~ S_w^-1 (m1 - m0) with a
// 1e-6 * trace(S_w) / d ridge on the within-class scatter.
LdaModel fit(const Matrix& features, std::span<const int> labels);

// Plain-value Fisher criterion (population variances). The differentiable
// form lives in ad::fisher_criterion.
double fisher_criterion(std::span<const double> projected, std::span<const int> labels);

// r * csp_loss + (1 - r) * fisher
double combined_loss(double csp_loss, double fisher, double r);

Vector project(const LdaModel& model, const Matrix& features);

// Nearest projected class mean; ties go to class 0.
std::vector<int> predict(const LdaModel& model, const Matrix& features);

}  // namespace ccsp::lda
