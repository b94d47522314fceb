#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "ccsp/stats.hpp"

namespace ccsp::fixtures {

// Published per-method summary statistics (accuracy %, n = 54 subjects).
struct MethodSummary {
  std::string_view name;
  double mean;
  double sd;
  int n;
};

// Subject-dependent methods; CCSPNet is last.
std::span<const MethodSummary> sd_methods();
// Subject-independent methods; CCSPNet is last.
std::span<const MethodSummary> si_methods();
std::span<const MethodSummary> sd_ablations();
std::span<const MethodSummary> si_ablations();
const MethodSummary& find_method(std::span<const MethodSummary> table, std::string_view name);

// Per-subject accuracies (%) of the 54 subjects, subject order 1..54.
std::span<const double> appendix_sd();
std::span<const double> appendix_si();

// Published test values.
struct PublishedT {
  std::string_view versus;
  double t;
  double p;
};
inline constexpr PublishedT kSdVsCsp{"CSP", 1.7679, 0.0400};
inline constexpr PublishedT kSdVsEegnet{"EEGNet", 2.6621, 0.0045};
inline constexpr stats::Anova kSdAnova{1.6945, 0.0972, 8, 477};
inline constexpr stats::Anova kSiAnova{2.9700, 0.0123, 5, 318};
inline constexpr double kPairedSdSiP = 0.45;

// Batch size / epoch grid of the full model (mean accuracy %).
struct GridCell {
  std::string_view approach;
  int batch_size;
  int epochs;
  double mean;
};
std::span<const GridCell> training_grid();

std::vector<stats::GroupSummary> as_groups(std::span<const MethodSummary> table);

}  // namespace ccsp::fixtures
