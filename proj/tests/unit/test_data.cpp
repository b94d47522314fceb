#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <set>
#include <tuple>

#include "ccsp/baseline.hpp"
#include "ccsp/dsp.hpp"
#include "ccsp/error.hpp"
#include "ccsp/preprocess.hpp"
#include "ccsp/splits.hpp"
#include "ccsp/synth.hpp"
#include "ccsp/trial_io.hpp"
#include "doctest.h"
#include "temp_dir.hpp"

using namespace ccsp;
using namespace ccsp::data;

namespace {

// Tiny trials whose single sample encodes (subject, index) so that splits can
// be checked for disjointness.
TrialSet tagged(int subjects, int per_block, std::size_t c = 1, std::size_t t = 1) {
  TrialSet set(c, t, 100.0);
  std::vector<float> x(c * t);
  for (int s = 1; s <= subjects; ++s) {
    int k = 0;
    for (int session = 1; session <= 2; ++session) {
      for (Phase p : {Phase::offline, Phase::online}) {
        for (int i = 0; i < per_block; ++i, ++k) {
          std::fill(x.begin(), x.end(), static_cast<float>(s * 100000 + k));
          set.push_back(x, k % 2, s, session, p);
        }
      }
    }
  }
  return set;
}

std::set<float> ids(const TrialSet& set) {
  std::set<float> out;
  for (std::size_t i = 0; i < set.size(); ++i) out.insert(set.trial(i)[0]);
  return out;
}

double band_power(std::span<const double> x, double fs, double lo, double hi) {
  // Hann-windowed periodogram summed over [lo, hi].
  const std::size_t n = x.size();
  double total = 0.0;
  const auto first = static_cast<std::size_t>(std::ceil(lo * static_cast<double>(n) / fs));
  const auto last = static_cast<std::size_t>(std::floor(hi * static_cast<double>(n) / fs));
  for (std::size_t k = first; k <= last; ++k) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
      const double a = 2.0 * std::numbers::pi * static_cast<double>(k * i) / static_cast<double>(n);
      re += w * x[i] * std::cos(a);
      im -= w * x[i] * std::sin(a);
    }
    total += re * re + im * im;
  }
  return total;
}

double baseline_accuracy(const TrialSet& processed, int subject) {
  const auto split = split_sd(select_subject(processed, subject));
  const auto x = split.train.to_f64();
  const auto b = eval::CspLdaBaseline::fit(x, split.train.size(), split.train.channels(), split.train.timepoints(),
                                           split.train.labels());
  const auto xt = split.test.to_f64();
  return eval::accuracy(b.predict(xt, split.test.size()), split.test.labels());
}

}  // namespace

TEST_SUITE("data") {
  TEST_CASE("trial set validation") {
    TrialSet set(2, 3, 100.0);
    const std::vector<float> ok(6, 1.0f);
    CHECK_NOTHROW(set.push_back(ok, 1, 1, 2, Phase::online));
    CHECK_THROWS_AS(set.push_back(ok, 2, 1, 1, Phase::offline), Error);
    CHECK_THROWS_AS(set.push_back(ok, 0, 1, 3, Phase::offline), Error);
    CHECK_THROWS_AS(set.push_back(std::vector<float>(5), 0, 1, 1, Phase::offline), Error);
    CHECK(parse_phase("online") == Phase::online);
    CHECK_THROWS_AS(parse_phase("both"), Error);
  }

  TEST_CASE("writer and reader round-trip bit-exactly") {
    TempDir dir;
    TrialSet set(3, 5, 1000.0);
    std::vector<float> x(15);
    int k = 0;
    for (int s : {1, 2}) {
      for (int session = 1; session <= 2; ++session) {
        for (Phase p : {Phase::offline, Phase::online}) {
          for (auto& v : x) v = std::ldexp(static_cast<float>(k++ % 97) - 48.5f, -(k % 11)) * 1.37f;
          set.push_back(x, k % 2, s, session, p);
        }
      }
    }
    const auto manifest = write_dataset(set, dir.path(), DatasetInfo{});
    const auto back = load_trials(manifest);
    REQUIRE(back.size() == 8);
    CHECK(back == set);
    for (std::size_t i = 0; i < set.samples().size(); ++i) {
      CHECK(std::memcmp(&set.samples()[i], &back.samples()[i], sizeof(float)) == 0);
    }

    TrialFilter only_offline;
    only_offline.phases = std::vector<Phase>{Phase::offline};
    const auto off = load_trials(manifest, only_offline);
    CHECK(off.size() == 4);
    for (auto p : off.phases()) CHECK(p == Phase::offline);

    TrialFilter subject2;
    subject2.subjects = std::vector<int>{2};
    subject2.sessions = std::vector<int>{1};
    const auto s2 = load_trials(manifest, subject2);
    CHECK(s2.size() == 2);
    for (auto s : s2.subjects()) CHECK(s == 2);
  }

  TEST_CASE("encode and decode agree") {
    const auto set = tagged(2, 3, 2, 4);
    CHECK(decode_trials(encode_trials(set), 100.0, "mem") == set);
    auto bytes = encode_trials(set);
    bytes.resize(bytes.size() - 3);
    CHECK_THROWS_AS(decode_trials(bytes, 100.0, "mem"), Error);
  }

  TEST_CASE("corrupted header names the file") {
    TempDir dir;
    const auto manifest = write_dataset(tagged(2, 1, 2, 3), dir.path());
    {
      std::fstream f(dir / "subject_002.eegt", std::ios::in | std::ios::out | std::ios::binary);
      f.write("XXXX", 4);
    }
    try {
      (void)load_trials(manifest);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::data);
      CHECK(std::string(e.what()).find("subject_002.eegt") != std::string::npos);
    }
  }

  TEST_CASE("manifest consistency checks") {
    TempDir dir;
    const auto manifest = write_dataset(tagged(1, 2, 1, 2), dir.path());
    const auto m = read_manifest(manifest);
    CHECK(DatasetManifest::parse(m.to_text(), "x").to_text() == m.to_text());
    CHECK(m.subjects.at(0).counts.total() == 8);

    // declared byte length disagrees with the file
    std::filesystem::resize_file(dir / "subject_001.eegt", m.subjects.at(0).bytes - 1);
    CHECK_THROWS_AS((void)load_trials(manifest), Error);

    // openbmi profile needs 100 trials per block
    auto bmi = m;
    bmi.profile = Profile::openbmi;
    CHECK_THROWS_AS(DatasetManifest::parse(bmi.to_text(), "x"), Error);
  }

  TEST_CASE("pre-processing dimensions") {
    TrialSet raw(62, 4000, 1000.0);
    std::vector<float> x(62 * 4000, 0.25f);
    raw.push_back(x, 0, 1, 1, Phase::offline);
    const auto out = preprocess(raw);
    CHECK(out.channels() == 62);
    CHECK(out.timepoints() == 250);
    CHECK(out.sample_rate_hz() == 100.0);
  }

  TEST_CASE("mains tone is removed") {
    RowMatrix trial(1, 4000);
    for (Eigen::Index i = 0; i < 4000; ++i) trial(0, i) = std::sin(2.0 * std::numbers::pi * 50.0 * static_cast<double>(i) / 1000.0 + 0.3);
    const auto out = preprocess_trial(trial, 1000.0);
    REQUIRE(out.cols() == 250);
    CHECK(out.squaredNorm() / 250.0 < 0.01 * 0.5);
  }

  TEST_CASE("band-limited content passes a second filter unchanged") {
    const auto band = dsp::design_bandpass(8.0, 30.0, 5, 100.0);
    std::vector<double> x(1500);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(2.0 * std::numbers::pi * 15.0 * static_cast<double>(i) / 100.0);
    const auto once = dsp::filter_forward(band, x);
    const auto twice = dsp::filter_forward(band, once);
    double a = 0.0, b = 0.0;
    for (std::size_t i = 500; i < x.size(); ++i) {
      a += once[i] * once[i];
      b += twice[i] * twice[i];
    }
    CHECK(std::abs(std::sqrt(b / a) - 1.0) < 0.01);
  }

  TEST_CASE("synthesizer is deterministic") {
    SynthConfig c;
    c.n_subjects = 2;
    c.trials_per_class = 8;
    c.n_channels = 4;
    const auto a = synthesize(c);
    const auto b = synthesize(c);
    CHECK(a == b);
    CHECK(a.size() == 32);
    c.seed = 2;
    CHECK_FALSE(synthesize(c) == a);
    c.trials_per_class = 7;
    CHECK_THROWS_AS(synthesize(c), Error);
  }

  TEST_CASE("planted mu power ratio at the source level") {
    SynthConfig c;
    c.trials_per_class = 60;
    for (int subject : {1, 2}) {
      const double erd = subject_model(c, subject).erd;
      double p0 = 0.0, p1 = 0.0;
      for (int i = 0; i < 2 * c.trials_per_class; ++i) {
        const int label = i % 2;
        const RowMatrix src = synthesize_sources(c, subject, i, label);
        const std::vector<double> left(src.row(0).data(), src.row(0).data() + src.cols());
        (label == 0 ? p0 : p1) += band_power(left, c.sample_rate_hz, 9.0, 11.0);
      }
      CHECK(std::abs(p0 / p1 / erd - 1.0) < 0.05);
    }
  }

  TEST_CASE("baseline separability of the synthetic data") {
    SynthConfig c;
    c.n_subjects = 1;
    const auto separable = preprocess(synthesize(c));
    CHECK(baseline_accuracy(separable, 1) >= 0.85);
    c.erd = 1.0;
    const auto flat = preprocess(synthesize(c));
    CHECK(std::abs(baseline_accuracy(flat, 1) - 0.5) <= 0.1);
  }

  TEST_CASE("subject-dependent split") {
    const auto bmi = tagged(1, 100);
    const auto split = split_sd(bmi);
    CHECK(split.train.size() == 300);
    CHECK(split.test.size() == 100);
    for (std::size_t i = 0; i < split.test.size(); ++i) {
      CHECK(split.test.session(i) == 2);
      CHECK(split.test.phase(i) == Phase::online);
    }
    const auto train_ids = ids(split.train), test_ids = ids(split.test);
    for (float v : test_ids) CHECK(train_ids.count(v) == 0);
    CHECK(train_ids.size() + test_ids.size() == 400);

    const auto syn = split_sd(tagged(1, 50));
    CHECK(syn.train.size() == 150);
    CHECK(syn.test.size() == 50);

    auto uneven = tagged(1, 4);
    uneven.push_back(std::vector<float>{1.0f}, 0, 1, 1, Phase::offline);
    CHECK_THROWS_AS(split_sd(uneven), Error);
    CHECK(split_sd(bmi).train == split.train);
  }

  TEST_CASE("leave-one-subject-out split") {
    const auto small = tagged(3, 20);
    const auto split = split_loso(small, 2, Phase::offline);
    CHECK(split.train.size() == 2 * 40);
    CHECK(split.test.size() == 20);
    for (auto s : split.train.subjects()) CHECK(s != 2);
    for (auto p : split.train.phases()) CHECK(p == Phase::offline);
    for (auto s : split.test.subjects()) CHECK(s == 2);
    CHECK_THROWS_AS(split_loso(small, 9, Phase::offline), Error);

    const auto full = tagged(54, 100);
    const auto big = split_loso(full, 7, Phase::offline);
    CHECK(big.train.size() == 10600);
    CHECK(big.test.size() == 100);
    const auto online = split_loso(full, 7, Phase::online);
    CHECK(online.train.size() == 10600);
    const auto a = ids(online.train), b = ids(online.test);
    for (float v : b) CHECK(a.count(v) == 0);
  }
}
