#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "ccsp/model.hpp"
#include "ccsp/splits.hpp"
#include "ccsp/trial_set.hpp"

namespace ccsp::eval {

enum class Approach { sd, si_offline, si_online };

std::string_view to_string(Approach a);
Approach parse_approach(std::string_view text);

struct SubjectResult {
  int subject = 0;
  double accuracy = 0.0;           // percent
  double baseline_accuracy = -1.0;  // percent, < 0 when not run
  std::uint64_t seed = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  double wall_time_s = 0.0;
  std::vector<HistoryEntry> history;
};

struct RunResult {
  Approach approach = Approach::sd;
  Ablation ablation = Ablation::none;
  ModelConfig config;
  std::uint64_t seed = 0;
  double wall_time_s = 0.0;
  std::vector<SubjectResult> subjects;  // ascending subject id

  std::vector<double> accuracies() const;
};

// Called from worker threads once a fold's model is finalized.
using ModelCallback = std::function<void(int subject, Model& model, const data::Split& split)>;

struct HarnessOptions {
  ModelConfig model;  // channel count, length and rate are taken from the data
  std::uint64_t seed = 1;
  int jobs = 1;
  bool with_baseline = false;
  ModelCallback on_model;
};

// Per-fold seed; depends only on (global seed, subject id).
std::uint64_t fold_seed(std::uint64_t global_seed, int subject);

// Runs fn(0..n-1) on up to `jobs` threads. The first exception (by task index)
// is rethrown after all workers stop.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

RunResult run_sd(const data::TrialSet& processed, const HarnessOptions& options);
RunResult run_loso(const data::TrialSet& processed, const HarnessOptions& options, data::Phase train_phase);
// Subject-dependent protocol with one component removed.
RunResult run_ablation(const data::TrialSet& processed, const HarnessOptions& options, Ablation component);

// LOSO variant training on the `train_phase` trials of the next k subjects (in
// cyclic id order) for each k in `counts`.
struct SweepPoint {
  int n_train_subjects = 0;
  RunResult result;
};
std::vector<SweepPoint> run_subject_sweep(const data::TrialSet& processed, const HarnessOptions& options,
                                          const std::vector<int>& counts, data::Phase train_phase);

// subject_id,approach,ablation,accuracy,seed
void write_results_csv(const RunResult& result, const std::filesystem::path& path);
// subject_id,epoch,batch,csp_loss,fisher,combined
void write_history_csv(const RunResult& result, const std::filesystem::path& path);
// Structured-text summary; the timestamp and wall times live only here.
std::string summary_report(const RunResult& result, std::string_view timestamp);

struct CsvRow {
  int subject = 0;
  std::string approach;
  std::string ablation;
  double accuracy = 0.0;
  std::uint64_t seed = 0;
};
std::vector<CsvRow> read_results_csv(const std::filesystem::path& path);

}  // namespace ccsp::eval
