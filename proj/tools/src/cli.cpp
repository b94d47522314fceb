#include "cli.hpp"

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "ccsp/baseline.hpp"
#include "ccsp/error.hpp"
#include "ccsp/harness.hpp"
#include "ccsp/preprocess.hpp"
#include "ccsp/splits.hpp"
#include "ccsp/synth.hpp"
#include "ccsp/trial_io.hpp"
#include "plots.hpp"
#include "run_config.hpp"
#include "stats_report.hpp"

namespace ccsp::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kCsvHelp = R"(Output files:
  results.csv   subject_id,approach,ablation,accuracy,seed   (accuracy in %)
  history.csv   subject_id,epoch,batch,csp_loss,fisher,combined
  summary.txt   key/value run summary; the only file carrying a timestamp
  config.txt    effective run configuration
  models/       subject_<id>.ccsp serialized models
  stft.csv      stage,kernel,time_s,freq_hz,magnitude
  scatter.csv   branch,trial,label,x,y

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numerical failure.
Environment: CCSP_SEED overrides the config seed (a --seed flag wins).)";

// Flags shared by the experiment commands. Unset optionals leave the config
// file value in place.
struct ExperimentFlags {
  std::string config;
  std::string manifest;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<int> epochs;
  std::optional<int> batch;
  std::string subjects;
  bool baseline = false;
  bool no_save_models = false;
  std::optional<std::string> phase;
  std::optional<std::string> component;
  std::string counts;
};

void add_experiment_flags(CLI::App* cmd, ExperimentFlags& f) {
  cmd->add_option("--config", f.config, "Run configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--manifest", f.manifest, "Dataset manifest (overrides the config)");
  cmd->add_option("--out", f.out, "Output directory (overrides the config)");
  cmd->add_option("--seed", f.seed, "Global seed");
  cmd->add_option("--jobs", f.jobs, "Worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--epochs", f.epochs, "Training epochs")->check(CLI::NonNegativeNumber);
  cmd->add_option("--batch", f.batch, "Batch size")->check(CLI::PositiveNumber);
  cmd->add_option("--subjects", f.subjects, "Comma-separated subject ids (default: all)");
  cmd->add_flag("--baseline", f.baseline, "Also run plain CSP+LDA per fold");
  cmd->add_flag("--no-save-models", f.no_save_models, "Do not write serialized models");
}

RunConfig resolve(const ExperimentFlags& f) {
  RunConfig rc = f.config.empty() ? RunConfig{} : RunConfig::load(f.config);
  if (const char* env = std::getenv("CCSP_SEED"); env != nullptr && *env != '\0') {
    std::uint64_t seed = 0;
    const std::string_view text(env);
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
      throw_invalid(fmt::format("CCSP_SEED: bad seed '{}'", text));
    }
    rc.seed = seed;
  }
  if (!f.manifest.empty()) rc.manifest = f.manifest;
  if (!f.out.empty()) rc.out_dir = f.out;
  if (f.seed) rc.seed = *f.seed;
  if (f.jobs) rc.jobs = *f.jobs;
  if (f.epochs) {
    rc.model.epochs = *f.epochs;
    rc.epochs_set = true;
  }
  if (f.batch) {
    rc.model.batch_size = *f.batch;
    rc.batch_set = true;
  }
  if (!f.subjects.empty()) rc.subjects = parse_int_list(f.subjects, "--subjects");
  if (f.baseline) rc.baseline = true;
  if (f.no_save_models) rc.save_models = false;
  if (f.phase) rc.phase = data::parse_phase(*f.phase);
  if (f.component) rc.component = parse_ablation(*f.component);
  if (!f.counts.empty()) rc.counts = parse_int_list(f.counts, "--counts");
  if (rc.manifest.empty()) throw_invalid("no dataset: pass --manifest or set [data] manifest in the config");
  return rc;
}

// A dataset directory stands for its manifest.txt.
fs::path manifest_path(const fs::path& p) { return fs::is_directory(p) ? p / "manifest.txt" : p; }

data::TrialSet load_processed(const RunConfig& rc) {
  data::TrialFilter filter;
  if (!rc.subjects.empty()) filter.subjects = rc.subjects;
  auto raw = data::load_trials(manifest_path(rc.manifest), filter);
  if (raw.empty()) throw_data(fmt::format("{}: no trials match the selection", rc.manifest.string()));
  return rc.preprocess ? data::preprocess(raw) : raw;
}

int effective_jobs(int jobs) {
  if (jobs > 0) return jobs;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

eval::HarnessOptions harness_options(const RunConfig& rc, const fs::path& model_dir) {
  eval::HarnessOptions o;
  o.model = rc.model;
  o.seed = rc.seed;
  o.jobs = effective_jobs(rc.jobs);
  o.with_baseline = rc.baseline;
  if (rc.save_models) {
    fs::create_directories(model_dir);
    o.on_model = [model_dir](int subject, Model& m, const data::Split&) {
      save_model(m, model_dir / fmt::format("subject_{:03d}.ccsp", subject));
    };
  }
  return o;
}

void write_run_outputs(const eval::RunResult& r, const fs::path& dir, const RunConfig& rc, std::ostream& out,
                       std::string_view suffix = "") {
  eval::write_results_csv(r, dir / fmt::format("results{}.csv", suffix));
  eval::write_history_csv(r, dir / fmt::format("history{}.csv", suffix));
  write_text(dir / fmt::format("summary{}.txt", suffix), eval::summary_report(r, utc_timestamp()));
  write_text(dir / "config.txt", rc.to_text());
  double sum = 0.0;
  for (const auto& s : r.subjects) {
    fmt::print(out, "subject {:3d}  accuracy {:6.2f}%", s.subject, s.accuracy);
    if (s.baseline_accuracy >= 0.0) fmt::print(out, "  baseline {:6.2f}%", s.baseline_accuracy);
    fmt::print(out, "  ({} train / {} test)\n", s.n_train, s.n_test);
    sum += s.accuracy;
  }
  if (!r.subjects.empty()) {
    fmt::print(out, "{} {}: mean accuracy {:.2f}% over {} subjects\n", to_string(r.approach), to_string(r.ablation),
               sum / static_cast<double>(r.subjects.size()), r.subjects.size());
  }
}

// ---- commands -------------------------------------------------------------

struct SynthFlags {
  int subjects = 4;
  int trials = 80;
  int channels = 16;
  double snr = 4.0;
  double erd = 0.5;
  double variability = 0.1;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_synth(const SynthFlags& f, std::ostream& out) {
  if (f.trials % 4 != 0) {
    throw_invalid(fmt::format("--trials must be a multiple of 4 (two classes in two-trial blocks), got {}", f.trials));
  }
  data::SynthConfig c;
  c.n_subjects = f.subjects;
  c.trials_per_class = f.trials / 2;
  c.n_channels = f.channels;
  c.snr = f.snr;
  c.erd = f.erd;
  c.subject_variability = f.variability;
  c.seed = f.seed;
  c.validate();
  const auto set = data::synthesize(c);
  data::DatasetInfo info;
  info.non_separable = f.erd == 1.0;
  const auto manifest = data::write_dataset(set, f.out, info);
  data::read_manifest(manifest).validate_files(manifest.parent_path());
  fmt::print(out, "wrote {} trials ({} subjects x {}) to {}\n", set.size(), f.subjects, f.trials, manifest.string());
  return kExitOk;
}

int cmd_train(const RunConfig& rc, std::ostream& out) {
  const auto set = load_processed(rc);
  ModelConfig cfg = rc.model;
  cfg.n_channels = static_cast<int>(set.channels());
  cfg.n_timepoints = static_cast<int>(set.timepoints());
  cfg.sample_rate_hz = set.sample_rate_hz();
  cfg.seed = rc.seed;
  Model model(cfg);
  const auto x = set.to_f64();
  const auto start = std::chrono::steady_clock::now();
  model.train(x, set.size(), set.labels());
  model.finalize(x, set.size(), set.labels());
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double acc = 100.0 * eval::accuracy(model.predict(x, set.size()), set.labels());

  fs::create_directories(rc.out_dir);
  save_model(model, rc.out_dir / "model.ccsp");
  eval::RunResult r;
  r.config = cfg;
  r.seed = rc.seed;
  r.wall_time_s = elapsed;
  r.subjects.push_back(eval::SubjectResult{0, acc, -1.0, rc.seed, set.size(), set.size(), elapsed, model.history()});
  eval::write_history_csv(r, rc.out_dir / "history.csv");
  write_text(rc.out_dir / "config.txt", rc.to_text());
  const auto params = model.count_parameters();
  write_text(rc.out_dir / "summary.txt",
             eval::summary_report(r, utc_timestamp()) + "\n[parameters]\n" + params.to_text());
  fmt::print(out, "trained on {} trials from {} subject(s); training accuracy {:.2f}%\n", set.size(),
             set.subject_ids().size(), acc);
  fmt::print(out, "{}model written to {}\n", params.to_text(), (rc.out_dir / "model.ccsp").string());
  return kExitOk;
}

int cmd_eval_sd(const RunConfig& rc, std::ostream& out) {
  fs::create_directories(rc.out_dir);
  const auto r = eval::run_sd(load_processed(rc), harness_options(rc, rc.out_dir / "models"));
  write_run_outputs(r, rc.out_dir, rc, out);
  return kExitOk;
}

RunConfig with_si_defaults(RunConfig rc) {
  if (!rc.batch_set) rc.model.batch_size = kSiBatchSize;
  if (!rc.epochs_set) rc.model.epochs = kSiEpochs;
  return rc;
}

int cmd_eval_si(const RunConfig& in, std::ostream& out) {
  const auto rc = with_si_defaults(in);
  fs::create_directories(rc.out_dir);
  const auto r = eval::run_loso(load_processed(rc), harness_options(rc, rc.out_dir / "models"), rc.phase);
  write_run_outputs(r, rc.out_dir, rc, out);
  return kExitOk;
}

int cmd_ablate(const RunConfig& rc, std::ostream& out) {
  if (rc.component == Ablation::none) throw_invalid("ablate: --component must name a component");
  fs::create_directories(rc.out_dir);
  const auto r = eval::run_ablation(load_processed(rc), harness_options(rc, rc.out_dir / "models"), rc.component);
  write_run_outputs(r, rc.out_dir, rc, out);
  return kExitOk;
}

int cmd_sweep(const RunConfig& in, std::ostream& out) {
  auto rc = with_si_defaults(in);
  rc.save_models = false;  // one model per fold and count would be mostly noise
  fs::create_directories(rc.out_dir);
  const auto options = harness_options(rc, rc.out_dir / "models");
  const auto points = eval::run_subject_sweep(load_processed(rc), options, rc.counts, rc.phase);
  for (const auto& p : points) {
    fmt::print(out, "-- {} training subject(s)\n", p.n_train_subjects);
    write_run_outputs(p.result, rc.out_dir, rc, out, fmt::format("_k{}", p.n_train_subjects));
  }
  return kExitOk;
}

int cmd_stats(bool use_fixtures, const std::vector<std::string>& csvs, const std::string& out_path, std::ostream& out) {
  if (use_fixtures == !csvs.empty()) throw_invalid("stats: pass either --fixtures or one or more --csv files");
  std::string report;
  if (use_fixtures) {
    report = fixtures_report();
  } else {
    std::vector<fs::path> paths(csvs.begin(), csvs.end());
    report = csv_report(paths);
  }
  out << report;
  if (!out_path.empty()) write_text(out_path, report);
  return kExitOk;
}

struct PlotFlags {
  bool stft = false;
  bool scatter = false;
  std::string manifest;
  std::string model;
  std::string out = "plots";
  int subject = 0;
  int trial = 0;
  int channel = 0;
  bool no_preprocess = false;
};

int cmd_plot(const PlotFlags& f, std::ostream& out) {
  if (f.stft == f.scatter) throw_invalid("plot: choose exactly one of --stft or --csp-scatter");
  if (f.model.empty()) throw_invalid("plot: the post-stage plots need --model");
  if (!fs::exists(f.model)) throw_data(fmt::format("plot: model file '{}' does not exist", f.model));
  auto model = load_model(f.model);
  if (!model.finalized()) throw_data(fmt::format("plot: model '{}' is not finalized", f.model));

  data::TrialFilter filter;
  if (f.subject > 0) filter.subjects = std::vector<int>{f.subject};
  auto set = data::load_trials(manifest_path(f.manifest), filter);
  if (set.empty()) throw_data(fmt::format("plot: no trials for subject {}", f.subject));
  if (!f.no_preprocess) set = data::preprocess(set);
  const int subject = f.subject > 0 ? f.subject : set.subject_ids().front();
  const auto split = data::split_sd(data::select_subject(set, subject));
  fs::create_directories(f.out);

  if (f.stft) {
    if (f.trial < 0 || static_cast<std::size_t>(f.trial) >= split.test.size()) {
      throw_invalid(fmt::format("plot: trial {} out of range (subject {} has {} test trials)", f.trial, subject,
                                split.test.size()));
    }
    const auto x = split.test.to_f64();
    const std::span<const double> trial(x.data() + static_cast<std::size_t>(f.trial) * split.test.trial_size(),
                                        split.test.trial_size());
    if (f.channel < 0) throw_invalid("plot: channel must be non-negative");
    const auto panels = stft_stages(model, trial, static_cast<std::size_t>(f.channel));
    write_stft_csv(panels, fs::path(f.out) / "stft.csv");
    write_text(fs::path(f.out) / "stft.svg",
               stft_svg(panels, fmt::format("subject {} test trial {} channel {} (label {})", subject, f.trial,
                                            f.channel, split.test.label(static_cast<std::size_t>(f.trial)))));
    fmt::print(out, "wrote {} STFT panels to {}\n", panels.size(), f.out);
  } else {
    const auto x = split.test.to_f64();
    const auto points = csp_scatter(model, x, split.test.size(), split.test.labels());
    write_scatter_csv(points, fs::path(f.out) / "scatter.csv");
    write_text(fs::path(f.out) / "scatter.svg",
               scatter_svg(points, fmt::format("CSP features, subject {} test trials", subject)));
    fmt::print(out, "wrote {} scatter points to {}\n", points.size(), f.out);
  }
  return kExitOk;
}

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::invalid_argument: return kExitUsage;
    case ErrorKind::data:
    case ErrorKind::io: return kExitData;
    case ErrorKind::numerical: return kExitNumerical;
  }
  return kExitUsage;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"CCSPNet motor-imagery EEG decoding toolkit", "ccspnet"};
  app.footer(kCsvHelp);
  app.require_subcommand(1);

  SynthFlags synth_flags;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic ERD/ERS dataset");
  synth->add_option("--subjects", synth_flags.subjects, "Number of subjects")->check(CLI::PositiveNumber);
  synth->add_option("--trials", synth_flags.trials, "Trials per subject (multiple of 4)")->check(CLI::PositiveNumber);
  synth->add_option("--channels", synth_flags.channels, "Channels")->check(CLI::Range(4, 1024));
  synth->add_option("--snr", synth_flags.snr, "Signal-to-noise power ratio")->check(CLI::PositiveNumber);
  synth->add_option("--erd", synth_flags.erd, "Desynchronization factor (1: no class difference)");
  synth->add_option("--variability", synth_flags.variability, "Between-subject variability");
  synth->add_option("--seed", synth_flags.seed, "Seed");
  synth->add_option("--out", synth_flags.out, "Output directory")->required();

  ExperimentFlags train_flags, sd_flags, si_flags, ablate_flags, sweep_flags;
  auto* train = app.add_subcommand("train", "Train one model on all selected trials and save it");
  add_experiment_flags(train, train_flags);
  auto* eval_sd = app.add_subcommand("eval-sd", "Subject-dependent evaluation");
  add_experiment_flags(eval_sd, sd_flags);
  auto* eval_si = app.add_subcommand("eval-si", "Subject-independent (leave-one-subject-out) evaluation");
  add_experiment_flags(eval_si, si_flags);
  eval_si->add_option("--phase", si_flags.phase, "Training phase: offline|online");
  auto* ablate = app.add_subcommand("ablate", "Subject-dependent evaluation with one component removed");
  add_experiment_flags(ablate, ablate_flags);
  ablate->add_option("--component", ablate_flags.component, "wkcnn|tcnn|frn|lda");
  auto* sweep = app.add_subcommand("sweep", "Leave-one-subject-out accuracy against the number of training subjects");
  add_experiment_flags(sweep, sweep_flags);
  sweep->add_option("--phase", sweep_flags.phase, "Training phase: offline|online");
  sweep->add_option("--counts", sweep_flags.counts, "Comma-separated training-subject counts");

  bool use_fixtures = false;
  std::vector<std::string> csvs;
  std::string stats_out;
  auto* stats = app.add_subcommand("stats", "t-tests and ANOVA on published fixtures or result CSVs");
  stats->add_flag("--fixtures", use_fixtures, "Use the embedded published tables");
  stats->add_option("--csv", csvs, "results.csv files (repeatable)")->check(CLI::ExistingFile);
  stats->add_option("--out", stats_out, "Also write the report to this file");

  PlotFlags plot_flags;
  auto* plot = app.add_subcommand("plot", "Emit STFT or CSP-scatter data as CSV and SVG");
  plot->add_flag("--stft", plot_flags.stft, "Time-frequency grids: raw, after WKCNN, after TCNN");
  plot->add_flag("--csp-scatter", plot_flags.scatter, "First/last CSP feature per branch, test trials");
  plot->add_option("--manifest", plot_flags.manifest, "Dataset manifest")->required();
  plot->add_option("--model", plot_flags.model, "Serialized model");
  plot->add_option("--out", plot_flags.out, "Output directory");
  plot->add_option("--subject", plot_flags.subject, "Subject id (default: first)");
  plot->add_option("--trial", plot_flags.trial, "Test-trial index for --stft");
  plot->add_option("--channel", plot_flags.channel, "Channel index for --stft");
  plot->add_flag("--no-preprocess", plot_flags.no_preprocess, "Manifest already holds pre-processed trials");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();  // resolves to the selected subcommand
      return kExitOk;
    }
    err << "ccspnet: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (synth->parsed()) return cmd_synth(synth_flags, out);
    if (train->parsed()) return cmd_train(resolve(train_flags), out);
    if (eval_sd->parsed()) return cmd_eval_sd(resolve(sd_flags), out);
    if (eval_si->parsed()) return cmd_eval_si(resolve(si_flags), out);
    if (ablate->parsed()) return cmd_ablate(resolve(ablate_flags), out);
    if (sweep->parsed()) return cmd_sweep(resolve(sweep_flags), out);
    if (stats->parsed()) return cmd_stats(use_fixtures, csvs, stats_out, out);
    if (plot->parsed()) return cmd_plot(plot_flags, out);
  } catch (const Error& e) {
    err << "ccspnet: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const fs::filesystem_error& e) {
    err << "ccspnet: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "ccspnet: internal error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}

}  // namespace ccsp::cli
