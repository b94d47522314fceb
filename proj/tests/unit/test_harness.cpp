#include <atomic>
#include <fstream>
#include <stdexcept>

#include "ccsp/error.hpp"
#include "ccsp/harness.hpp"
#include "ccsp/preprocess.hpp"
#include "ccsp/synth.hpp"
#include "doctest.h"
#include "temp_dir.hpp"

using namespace ccsp;

namespace {

const data::TrialSet& tiny_dataset() {
  static const data::TrialSet set = [] {
    data::SynthConfig c;
    c.n_subjects = 3;
    c.trials_per_class = 16;
    c.n_channels = 6;
    c.subject_variability = 0.05;
    return data::preprocess(data::synthesize(c));
  }();
  return set;
}

eval::HarnessOptions tiny_options(int jobs = 1) {
  eval::HarnessOptions o;
  o.model.wavelet_len = 16;
  o.model.temporal_len = 16;
  o.model.epochs = 2;
  o.model.batch_size = 24;
  o.seed = 13;
  o.jobs = jobs;
  return o;
}

data::TrialSet reorder(const data::TrialSet& set, const std::vector<int>& subject_order) {
  data::TrialSet out;
  for (int s : subject_order) {
    const auto part = data::select_subject(set, s);
    if (out.empty()) out = part;
    else out.append(part);
  }
  return out;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("fold seeds") {
    CHECK(eval::fold_seed(1, 3) == eval::fold_seed(1, 3));
    CHECK(eval::fold_seed(1, 3) != eval::fold_seed(1, 4));
    CHECK(eval::fold_seed(1, 3) != eval::fold_seed(2, 3));
  }

  TEST_CASE("parallel_for covers every index and rethrows the first failure") {
    std::vector<std::atomic<int>> hits(50);
    eval::parallel_for(50, 4, [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) CHECK(h.load() == 1);
    CHECK_THROWS_WITH(eval::parallel_for(10, 3,
                                         [](std::size_t i) {
                                           if (i == 2 || i == 7) throw std::runtime_error("task " + std::to_string(i));
                                         }),
                      "task 2");
  }

  TEST_CASE("approach names") {
    CHECK(eval::to_string(eval::Approach::si_offline) == "SI-offline");
    CHECK(eval::parse_approach("SD") == eval::Approach::sd);
    CHECK_THROWS_AS(eval::parse_approach("XX"), Error);
  }

  TEST_CASE("subject-dependent runs are deterministic across thread counts") {
    const auto a = eval::run_sd(tiny_dataset(), tiny_options(1));
    const auto b = eval::run_sd(tiny_dataset(), tiny_options(3));
    REQUIRE(a.subjects.size() == 3);
    CHECK(a.accuracies() == b.accuracies());
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(a.subjects[i].subject == static_cast<int>(i) + 1);
      CHECK(a.subjects[i].seed == eval::fold_seed(13, a.subjects[i].subject));
      CHECK(a.subjects[i].n_train == 24);
      CHECK(a.subjects[i].n_test == 8);
      CHECK(a.subjects[i].accuracy >= 0.0);
      CHECK(a.subjects[i].accuracy <= 100.0);
      CHECK(a.subjects[i].history.size() == b.subjects[i].history.size());
    }
  }

  TEST_CASE("LOSO folds do not depend on subject order") {
    const auto a = eval::run_loso(tiny_dataset(), tiny_options(), data::Phase::offline);
    const auto b = eval::run_loso(reorder(tiny_dataset(), {3, 1, 2}), tiny_options(), data::Phase::offline);
    CHECK(a.accuracies() == b.accuracies());
    CHECK(a.approach == eval::Approach::si_offline);
    CHECK(a.subjects[0].n_train == 2 * 16);
    const auto online = eval::run_loso(tiny_dataset(), tiny_options(), data::Phase::online);
    CHECK(online.approach == eval::Approach::si_online);
  }

  TEST_CASE("ablation runs and subject sweeps") {
    const auto r = eval::run_ablation(tiny_dataset(), tiny_options(), Ablation::frn);
    CHECK(r.ablation == Ablation::frn);
    CHECK(r.config.ablation == Ablation::frn);
    const auto sweep = eval::run_subject_sweep(tiny_dataset(), tiny_options(), {1, 2}, data::Phase::offline);
    REQUIRE(sweep.size() == 2);
    CHECK(sweep[0].n_train_subjects == 1);
    CHECK(sweep[0].result.subjects[0].n_train == 16);
    CHECK(sweep[1].result.subjects[0].n_train == 32);
  }

  TEST_CASE("callback sees each finalized model") {
    auto o = tiny_options(2);
    std::atomic<int> calls{0};
    o.on_model = [&](int, Model& m, const data::Split&) {
      CHECK(m.finalized());
      calls++;
    };
    o.with_baseline = true;
    const auto r = eval::run_sd(tiny_dataset(), o);
    CHECK(calls.load() == 3);
    for (const auto& s : r.subjects) CHECK(s.baseline_accuracy >= 0.0);
  }

  TEST_CASE("results CSV round-trip and report") {
    TempDir dir;
    const auto r = eval::run_sd(tiny_dataset(), tiny_options());
    eval::write_results_csv(r, dir / "results.csv");
    const auto rows = eval::read_results_csv(dir / "results.csv");
    REQUIRE(rows.size() == r.subjects.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(rows[i].subject == r.subjects[i].subject);
      CHECK(rows[i].approach == "SD");
      CHECK(rows[i].ablation == "none");
      CHECK(rows[i].accuracy == doctest::Approx(r.subjects[i].accuracy).epsilon(1e-9));
      CHECK(rows[i].seed == r.subjects[i].seed);
    }
    eval::write_history_csv(r, dir / "history.csv");
    CHECK(std::filesystem::file_size(dir / "history.csv") > 0);
    const auto report = eval::summary_report(r, "2026-01-01T00:00:00Z");
    const auto doc = parse_kv(report, "report");
    CHECK(doc.find_section("run") != nullptr);
    CHECK(doc.find_section("accuracy") != nullptr);

    {
      std::ofstream f(dir / "bad.csv");
      f << "subject,acc\n1,50\n";
    }
    CHECK_THROWS_AS(eval::read_results_csv(dir / "bad.csv"), Error);
  }
}
