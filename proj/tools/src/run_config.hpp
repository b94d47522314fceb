#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ccsp/model.hpp"
#include "ccsp/trial_set.hpp"

namespace ccsp::cli {

// Everything an experiment command needs. Loaded from a sectioned key/value
// file; every key is optional and defaults to the published hyperparameters.
//
//   [data]       manifest, subjects, preprocess
//   [experiment] phase, component, baseline, counts
//   [output]     dir, save_models
//   [run]        seed, jobs
//   [model]      any ModelConfig key except the data-derived shape
struct RunConfig {
  std::filesystem::path manifest;
  std::vector<int> subjects;  // empty: all
  bool preprocess = true;

  data::Phase phase = data::Phase::offline;
  Ablation component = Ablation::wkcnn;
  bool baseline = false;
  std::vector<int> counts{1, 2, 3};

  std::filesystem::path out_dir = "results";
  bool save_models = true;

  std::uint64_t seed = 1;
  int jobs = 0;  // 0: all available cores

  ModelConfig model;
  // Set when epochs / batch_size came from the file or a flag, so that the
  // subject-independent defaults (5300, 10) do not override them.
  bool epochs_set = false;
  bool batch_set = false;

  static RunConfig parse(std::string_view text, std::string_view origin);
  static RunConfig load(const std::filesystem::path& path);
  std::string to_text() const;
};

// Subject-independent defaults from the published hyperparameter table.
inline constexpr int kSiBatchSize = 5300;
inline constexpr int kSiEpochs = 10;

std::vector<int> parse_int_list(std::string_view text, std::string_view what);

}  // namespace ccsp::cli
