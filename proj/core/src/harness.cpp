#include "ccsp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <exception>
#include <fstream>
#include <thread>

#include <fmt/format.h>

#include "ccsp/baseline.hpp"
#include "ccsp/error.hpp"
#include "ccsp/kv_text.hpp"
#include "ccsp/stats.hpp"
#include "ccsp/synth.hpp"

namespace ccsp::eval {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

SubjectResult run_fold(int subject, const data::Split& split, ModelConfig config, const HarnessOptions& options) {
  const auto start = Clock::now();
  config.n_channels = static_cast<int>(split.train.channels());
  config.n_timepoints = static_cast<int>(split.train.timepoints());
  config.sample_rate_hz = split.train.sample_rate_hz();
  config.seed = fold_seed(options.seed, subject);

  const auto x_train = split.train.to_f64();
  const auto x_test = split.test.to_f64();
  Model model(config);
  model.train(x_train, split.train.size(), split.train.labels());
  model.finalize(x_train, split.train.size(), split.train.labels());

  SubjectResult r;
  r.subject = subject;
  r.seed = config.seed;
  r.n_train = split.train.size();
  r.n_test = split.test.size();
  r.accuracy = 100.0 * accuracy(model.predict(x_test, split.test.size()), split.test.labels());
  if (options.with_baseline) {
    const auto b = CspLdaBaseline::fit(x_train, split.train.size(), split.train.channels(), split.train.timepoints(),
                                       split.train.labels());
    r.baseline_accuracy = 100.0 * accuracy(b.predict(x_test, split.test.size()), split.test.labels());
  }
  r.history = model.history();
  if (options.on_model) options.on_model(subject, model, split);
  r.wall_time_s = seconds_since(start);
  return r;
}

RunResult run_folds(const std::vector<int>& subjects, const std::function<data::Split(int)>& make_split,
                    const HarnessOptions& options, Approach approach, const ModelConfig& config) {
  const auto start = Clock::now();
  RunResult result;
  result.approach = approach;
  result.ablation = config.ablation;
  result.config = config;
  result.seed = options.seed;
  result.subjects.resize(subjects.size());
  parallel_for(subjects.size(), options.jobs, [&](std::size_t i) {
    const int s = subjects[i];
    try {
      result.subjects[i] = run_fold(s, make_split(s), config, options);
    } catch (const Error& e) {
      throw Error(e.kind(), fmt::format("subject {}: {}", s, e.what()));
    }
  });
  result.wall_time_s = seconds_since(start);
  return result;
}

ModelConfig data_config(ModelConfig config, const data::TrialSet& set) {
  config.n_channels = static_cast<int>(set.channels());
  config.n_timepoints = static_cast<int>(set.timepoints());
  config.sample_rate_hz = set.sample_rate_hz();
  return config;
}

}  // namespace

std::string_view to_string(Approach a) {
  switch (a) {
    case Approach::sd: return "SD";
    case Approach::si_offline: return "SI-offline";
    case Approach::si_online: return "SI-online";
  }
  return "SD";
}

Approach parse_approach(std::string_view text) {
  for (auto a : {Approach::sd, Approach::si_offline, Approach::si_online}) {
    if (text == to_string(a)) return a;
  }
  throw_data(fmt::format("unknown approach '{}'", text));
}

std::vector<double> RunResult::accuracies() const {
  std::vector<double> out;
  for (const auto& s : subjects) out.push_back(s.accuracy);
  return out;
}

std::uint64_t fold_seed(std::uint64_t global_seed, int subject) {
  return data::mix_seed(global_seed ^ 0xf01dULL, static_cast<std::uint64_t>(subject));
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  std::vector<std::exception_ptr> errors(n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
        break;
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n && !failed; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
            failed = true;
          }
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

RunResult run_sd(const data::TrialSet& processed, const HarnessOptions& options) {
  if (processed.empty()) throw_data("run_sd: empty dataset");
  const auto config = data_config(options.model, processed);
  config.validate();
  return run_folds(
      processed.subject_ids(), [&](int s) { return data::split_sd(data::select_subject(processed, s)); }, options,
      Approach::sd, config);
}

RunResult run_loso(const data::TrialSet& processed, const HarnessOptions& options, data::Phase train_phase) {
  if (processed.subject_ids().size() < 2) throw_data("run_loso: need at least two subjects");
  const auto config = data_config(options.model, processed);
  config.validate();
  return run_folds(
      processed.subject_ids(), [&](int s) { return data::split_loso(processed, s, train_phase); }, options,
      train_phase == data::Phase::offline ? Approach::si_offline : Approach::si_online, config);
}

RunResult run_ablation(const data::TrialSet& processed, const HarnessOptions& options, Ablation component) {
  if (component == Ablation::none) throw_invalid("run_ablation: choose one of wkcnn|tcnn|frn|lda");
  HarnessOptions o = options;
  o.model.ablation = component;
  return run_sd(processed, o);
}

std::vector<SweepPoint> run_subject_sweep(const data::TrialSet& processed, const HarnessOptions& options,
                                          const std::vector<int>& counts, data::Phase train_phase) {
  const auto ids = processed.subject_ids();
  const auto config = data_config(options.model, processed);
  config.validate();
  std::vector<SweepPoint> out;
  for (int k : counts) {
    if (k < 1 || static_cast<std::size_t>(k) >= ids.size()) {
      throw_invalid(fmt::format("subject sweep: {} training subjects requested, {} available", k, ids.size() - 1));
    }
    const auto make_split = [&](int s) {
      const auto pos = static_cast<std::size_t>(std::find(ids.begin(), ids.end(), s) - ids.begin());
      std::vector<int> keep{s};
      for (int j = 1; j <= k; ++j) keep.push_back(ids[(pos + static_cast<std::size_t>(j)) % ids.size()]);
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < processed.size(); ++i) {
        if (std::find(keep.begin(), keep.end(), processed.subject(i)) != keep.end()) idx.push_back(i);
      }
      return data::split_loso(processed.subset(idx), s, train_phase);
    };
    out.push_back(SweepPoint{k, run_folds(ids, make_split, options,
                                          train_phase == data::Phase::offline ? Approach::si_offline
                                                                              : Approach::si_online,
                                          config)});
  }
  return out;
}

void write_results_csv(const RunResult& result, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw_io(fmt::format("cannot open '{}' for writing", path.string()));
  out << "subject_id,approach,ablation,accuracy,seed\n";
  for (const auto& s : result.subjects) {
    out << fmt::format("{},{},{},{},{}\n", s.subject, to_string(result.approach), to_string(result.ablation),
                       s.accuracy, s.seed);
  }
  if (!out) throw_io(fmt::format("error writing '{}'", path.string()));
}

void write_history_csv(const RunResult& result, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw_io(fmt::format("cannot open '{}' for writing", path.string()));
  out << "subject_id,epoch,batch,csp_loss,fisher,combined\n";
  for (const auto& s : result.subjects) {
    for (const auto& h : s.history) {
      out << fmt::format("{},{},{},{},{},{}\n", s.subject, h.epoch, h.batch, h.csp_loss, h.fisher, h.combined);
    }
  }
  if (!out) throw_io(fmt::format("error writing '{}'", path.string()));
}

std::string summary_report(const RunResult& result, std::string_view timestamp) {
  KvDocument doc;
  const auto put = [](KvSection& s, std::string k, std::string v) { s.entries.push_back({std::move(k), std::move(v), 0}); };
  auto& head = doc.section("run");
  put(head, "generated", std::string(timestamp));
  put(head, "approach", std::string(to_string(result.approach)));
  put(head, "ablation", std::string(to_string(result.ablation)));
  put(head, "seed", fmt::format("{}", result.seed));
  put(head, "subjects", fmt::format("{}", result.subjects.size()));
  put(head, "wall_time_s", fmt::format("{:.3f}", result.wall_time_s));
  if (!result.subjects.empty()) {
    const auto acc = result.accuracies();
    const auto s = stats::summarize(acc);
    auto& sum = doc.section("accuracy");
    put(sum, "mean", fmt::format("{:.2f}", s.mean));
    put(sum, "sd", fmt::format("{:.2f}", s.sd));
    put(sum, "median", fmt::format("{:.2f}", s.median));
    put(sum, "range", fmt::format("{:.2f} ({:.2f}-{:.2f})", s.range, s.min, s.max));
    std::vector<double> base;
    for (const auto& r : result.subjects) {
      if (r.baseline_accuracy >= 0.0) base.push_back(r.baseline_accuracy);
    }
    if (base.size() == result.subjects.size()) {
      const auto b = stats::summarize(base);
      put(sum, "baseline_csp_lda_mean", fmt::format("{:.2f}", b.mean));
    }
  }
  result.config.write(doc.section("model"));
  return doc.to_string();
}

std::vector<CsvRow> read_results_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw_io(fmt::format("cannot open '{}'", path.string()));
  std::string line;
  if (!std::getline(in, line) || trim(line) != "subject_id,approach,ablation,accuracy,seed") {
    throw_data(fmt::format("{}:1: expected header 'subject_id,approach,ablation,accuracy,seed'", path.string()));
  }
  std::vector<CsvRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != 5) throw_data(fmt::format("{}:{}: expected 5 columns, got {}", path.string(), lineno, cells.size()));
    try {
      CsvRow r;
      r.subject = static_cast<int>(parse_int(cells[0], "subject_id"));
      r.approach = std::string(trim(cells[1]));
      r.ablation = std::string(trim(cells[2]));
      r.accuracy = parse_double(cells[3], "accuracy");
      const auto seed = trim(cells[4]);
      const auto [ptr, ec] = std::from_chars(seed.data(), seed.data() + seed.size(), r.seed);
      if (ec != std::errc{} || ptr != seed.data() + seed.size()) throw_data(fmt::format("bad seed '{}'", seed));
      if (r.accuracy < 0.0 || r.accuracy > 100.0) throw_data(fmt::format("accuracy {} outside [0, 100]", r.accuracy));
      rows.push_back(std::move(r));
    } catch (const Error& e) {
      throw_data(fmt::format("{}:{}: {}", path.string(), lineno, e.what()));
    }
  }
  if (rows.empty()) throw_data(fmt::format("{}: no result rows", path.string()));
  return rows;
}

}  // namespace ccsp::eval
