#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace ccsp::cli {

// Table-5-style report from the embedded published summaries and per-subject
// appendix columns.
std::string fixtures_report();

// Summaries of each results CSV; with two or more, paired and unpaired t-tests
// of the first against each other file plus a one-way ANOVA over all.
std::string csv_report(const std::vector<std::filesystem::path>& csvs);

}  // namespace ccsp::cli
