#include "ccsp/fixtures.hpp"

#include <fmt/format.h>

#include "ccsp/error.hpp"

namespace ccsp::fixtures {

namespace {

constexpr std::array<MethodSummary, 9> kSd{{
    {"CSP", 68.57, 17.57, 54},
    {"CSSP", 69.68, 18.53, 54},
    {"FBCSP", 70.59, 18.56, 54},
    {"BSSFO", 71.02, 18.83, 54},
    {"EEGNet", 65.31, 18.72, 54},
    {"MIN2Net", 66.06, 16.58, 54},
    {"Molla", 73.85, 15.25, 54},
    {"Kwon", 71.32, 15.88, 54},
    {"CCSPNet", 74.41, 16.75, 54},
}};

constexpr std::array<MethodSummary, 6> kSi{{
    {"Pooled CSP", 65.65, 16.11, 54},
    {"Fused model", 67.37, 16.01, 54},
    {"MR FBCSP", 68.59, 15.28, 54},
    {"MIN2Net", 72.03, 14.04, 54},
    {"Kwon", 74.15, 15.83, 54},
    {"CCSPNet", 74.28, 16.12, 54},
}};

constexpr std::array<MethodSummary, 4> kSdAblation{{
    {"wkcnn", 72.61, 17.52, 54},
    {"tcnn", 70.78, 16.37, 54},
    {"frn", 69.98, 17.71, 54},
    {"lda", 68.91, 15.88, 54},
}};

constexpr std::array<MethodSummary, 4> kSiAblation{{
    {"wkcnn", 70.94, 15.81, 54},
    {"tcnn", 69.59, 16.98, 54},
    {"frn", 72.57, 16.74, 54},
    {"lda", 71.39, 16.71, 54},
}};

constexpr std::array<double, 54> kAppendixSd{
    91, 91, 97, 68, 86, 91, 81, 66, 70, 68, 47, 58, 60, 57, 59, 58, 67, 94, 85, 59, 100, 90, 62, 49, 92, 55, 50,
    100, 99, 68, 68, 98, 99, 68, 85, 91, 90, 59, 69, 70, 57, 58, 90, 100, 97, 89, 54, 67, 63, 72, 53, 86, 61, 56};

constexpr std::array<double, 54> kAppendixSi{
    85, 74, 96, 58, 88, 85, 68, 80, 76, 58, 49, 53, 65, 66, 62, 69, 81, 97, 83, 81, 98, 95, 65, 59, 64, 59, 62,
    100, 90, 60, 72, 99, 98, 50, 57, 90, 94, 52, 85, 58, 52, 75, 68, 100, 97, 86, 89, 54, 60, 52, 85, 85, 59, 68};

constexpr std::array<GridCell, 14> kGrid{{
    {"SD", 300, 10, 73.50},
    {"SD", 300, 20, 74.41},
    {"SI-offline", 2650, 10, 73.39},
    {"SI-offline", 2650, 20, 73.83},
    {"SI-offline", 5300, 10, 74.28},
    {"SI-offline", 5300, 20, 73.76},
    {"SI-offline", 10600, 10, 73.59},
    {"SI-offline", 10600, 20, 73.46},
    {"SI-online", 2650, 10, 71.74},
    {"SI-online", 2650, 20, 72.57},
    {"SI-online", 5300, 10, 72.13},
    {"SI-online", 5300, 20, 73.11},
    {"SI-online", 10600, 10, 71.35},
    {"SI-online", 10600, 20, 71.74},
}};

}  // namespace

std::span<const MethodSummary> sd_methods() { return kSd; }
std::span<const MethodSummary> si_methods() { return kSi; }
std::span<const MethodSummary> sd_ablations() { return kSdAblation; }
std::span<const MethodSummary> si_ablations() { return kSiAblation; }
std::span<const double> appendix_sd() { return kAppendixSd; }
std::span<const double> appendix_si() { return kAppendixSi; }
std::span<const GridCell> training_grid() { return kGrid; }

const MethodSummary& find_method(std::span<const MethodSummary> table, std::string_view name) {
  for (const auto& m : table) {
    if (m.name == name) return m;
  }
  throw_invalid(fmt::format("no fixture row named '{}'", name));
}

std::vector<stats::GroupSummary> as_groups(std::span<const MethodSummary> table) {
  std::vector<stats::GroupSummary> out;
  for (const auto& m : table) out.push_back({m.mean, m.sd, m.n});
  return out;
}

}  // namespace ccsp::fixtures
