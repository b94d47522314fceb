#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "ccsp/harness.hpp"
#include "ccsp/model.hpp"
#include "ccsp/trial_io.hpp"
#include "cli.hpp"
#include "doctest.h"
#include "run_config.hpp"
#include "temp_dir.hpp"

using namespace ccsp;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result ccspnet(std::vector<std::string> args) {
  args.insert(args.begin(), "ccspnet");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) rows.push_back(split(line, ','));
  return rows;
}

// Tag balance of a generated SVG (no DTDs, CDATA or comments are emitted).
bool well_formed(const std::string& xml) {
  std::vector<std::string> stack;
  std::size_t pos = 0;
  bool root_seen = false;
  while ((pos = xml.find('<', pos)) != std::string::npos) {
    const auto end = xml.find('>', pos);
    if (end == std::string::npos) return false;
    const std::string tag = xml.substr(pos + 1, end - pos - 1);
    pos = end + 1;
    if (tag.empty()) return false;
    if (tag.front() == '?') continue;
    if (tag.find('<') != std::string::npos) return false;
    const auto name_of = [](const std::string& t) { return t.substr(0, t.find_first_of(" \t\n/")); };
    if (tag.front() == '/') {
      if (stack.empty() || stack.back() != tag.substr(1)) return false;
      stack.pop_back();
    } else if (tag.back() == '/') {
      if (stack.empty()) return false;
    } else {
      if (stack.empty() && root_seen) return false;
      root_seen = true;
      stack.push_back(name_of(tag));
    }
  }
  return root_seen && stack.empty();
}

// Small separable dataset shared by the tests: 2 subjects x 40 trials, 8 channels.
const std::filesystem::path& dataset() {
  static TempDir dir;
  static const bool made = [] {
    const auto r = ccspnet({"synth", "--subjects", "2", "--trials", "40", "--channels", "8", "--out", dir.path().string()});
    REQUIRE(r.code == 0);
    return true;
  }();
  (void)made;
  return dir.path();
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("synth defaults, determinism and the non-separable flag") {
    TempDir a, b, c;
    REQUIRE(ccspnet({"synth", "--out", a.path().string()}).code == 0);
    const auto m = data::read_manifest(a / "manifest.txt");
    CHECK_NOTHROW(m.validate_files(a.path()));
    CHECK(m.subjects.size() == 4);
    for (const auto& s : m.subjects) CHECK(s.counts.total() == 80);
    CHECK_FALSE(m.non_separable);

    REQUIRE(ccspnet({"synth", "--out", b.path().string()}).code == 0);
    for (const auto& s : m.subjects) CHECK(slurp(a / s.file) == slurp(b / s.file));
    CHECK(slurp(a / "manifest.txt") == slurp(b / "manifest.txt"));

    REQUIRE(ccspnet({"synth", "--erd", "1.0", "--subjects", "1", "--out", c.path().string()}).code == 0);
    CHECK(data::read_manifest(c / "manifest.txt").non_separable);
    CHECK(ccspnet({"synth", "--trials", "30", "--out", c.path().string()}).code == cli::kExitUsage);
  }

  TEST_CASE("eval-sd writes per-subject outputs reproducibly") {
    TempDir out1, out2;
    const auto args = [&](const TempDir& d) {
      return std::vector<std::string>{"eval-sd", "--manifest", dataset().string(), "--out", d.path().string(),
                                      "--epochs", "3", "--jobs", "2"};
    };
    const auto r = ccspnet(args(out1));
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const auto rows = read_csv(out1 / "results.csv");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0][0] == "1");
    CHECK(rows[0][1] == "SD");
    CHECK(std::filesystem::exists(out1 / "models" / "subject_002.ccsp"));
    CHECK(std::filesystem::exists(out1 / "history.csv"));
    CHECK(std::filesystem::exists(out1 / "summary.txt"));

    REQUIRE(ccspnet(args(out2)).code == 0);
    for (const char* f : {"results.csv", "history.csv", "models/subject_001.ccsp"}) {
      CHECK_MESSAGE(slurp(out1 / f) == slurp(out2 / f), f);
    }
    // config.txt differs only in the output directory
    auto c1 = cli::RunConfig::parse(slurp(out1 / "config.txt"), "a");
    auto c2 = cli::RunConfig::parse(slurp(out2 / "config.txt"), "b");
    c2.out_dir = c1.out_dir;
    CHECK(c1.to_text() == c2.to_text());
  }

  TEST_CASE("zero epochs saves the initialization weights") {
    TempDir out;
    REQUIRE(ccspnet({"eval-sd", "--manifest", dataset().string(), "--out", out.path().string(), "--epochs", "0",
                     "--subjects", "1"})
                .code == 0);
    auto loaded = load_model(out / "models" / "subject_001.ccsp");
    Model fresh(loaded.config());
    CHECK(loaded.history().empty());
    CHECK(loaded.wavelet_params().value() == fresh.wavelet_params().value());
    CHECK(loaded.temporal_kernels().value() == fresh.temporal_kernels().value());
    for (std::size_t i = 0; i < fresh.dense_layers().size(); ++i) {
      CHECK(loaded.dense_layers()[i].w.value() == fresh.dense_layers()[i].w.value());
    }
  }

  TEST_CASE("other experiment commands") {
    TempDir si, ab, sw, tr;
    auto r = ccspnet({"eval-si", "--manifest", dataset().string(), "--out", si.path().string(), "--phase", "online",
                      "--epochs", "2", "--no-save-models"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(read_csv(si / "results.csv").at(0).at(1) == "SI-online");
    CHECK_FALSE(std::filesystem::exists(si / "models"));
    // subject-independent defaults apply unless overridden
    CHECK(slurp(si / "config.txt").find("batch_size = 5300") != std::string::npos);

    r = ccspnet({"ablate", "--manifest", dataset().string(), "--out", ab.path().string(), "--component", "frn",
                 "--epochs", "2"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(read_csv(ab / "results.csv").at(0).at(2) == "frn");
    CHECK(ccspnet({"ablate", "--manifest", dataset().string(), "--component", "none"}).code == cli::kExitUsage);

    r = ccspnet({"sweep", "--manifest", dataset().string(), "--out", sw.path().string(), "--counts", "1", "--epochs",
                 "1"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(std::filesystem::exists(sw / "results_k1.csv"));

    r = ccspnet({"train", "--manifest", dataset().string(), "--out", tr.path().string(), "--epochs", "2"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(load_model(tr / "model.ccsp").finalized());
    CHECK(slurp(tr / "summary.txt").find("csp (frozen)") != std::string::npos);
  }

  TEST_CASE("configuration files and the seed override") {
    TempDir dir;
    {
      std::ofstream f(dir / "run.cfg");
      f << "[data]\nmanifest = " << dataset().string() << "\nsubjects = 2\n\n[run]\nseed = 5\njobs = 1\n\n"
        << "[model]\nepochs = 1\n\n[output]\ndir = " << (dir / "out").string() << "\n";
    }
    auto r = ccspnet({"eval-sd", "--config", (dir / "run.cfg").string()});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    auto rows = read_csv(dir / "out" / "results.csv");
    REQUIRE(rows.size() == 1);
    CHECK(rows[0][4] == std::to_string(eval::fold_seed(5, 2)));

    ::setenv("CCSP_SEED", "9", 1);
    r = ccspnet({"eval-sd", "--config", (dir / "run.cfg").string()});
    ::unsetenv("CCSP_SEED");
    REQUIRE(r.code == 0);
    rows = read_csv(dir / "out" / "results.csv");
    CHECK(rows[0][4] == std::to_string(eval::fold_seed(9, 2)));

    {
      std::ofstream f(dir / "bad.cfg");
      f << "[run]\nseed = 5\n[model]\nepochs = 1\nlearning_rate = 3\n";
    }
    r = ccspnet({"eval-sd", "--config", (dir / "bad.cfg").string(), "--manifest", dataset().string()});
    CHECK(r.code == cli::kExitUsage);
    CHECK(r.err.find("bad.cfg:5") != std::string::npos);
    CHECK(r.err.find("learning_rate") != std::string::npos);
  }

  TEST_CASE("run config text round-trip and defaults") {
    cli::RunConfig rc;
    CHECK(rc.model == ModelConfig{});
    rc.subjects = {1, 3};
    rc.phase = data::Phase::online;
    rc.model.loss_ratio = 0.5;
    const auto back = cli::RunConfig::parse(rc.to_text(), "mem");
    CHECK(back.to_text() == rc.to_text());
    CHECK(back.model.loss_ratio == 0.5);
    CHECK_THROWS_AS(cli::RunConfig::parse("[extra]\na = 1\n", "mem"), Error);
    CHECK_THROWS_AS(cli::RunConfig::parse("loose = 1\n", "mem"), Error);
  }

  TEST_CASE("error exit codes") {
    TempDir dir;
    CHECK(ccspnet({}).code == cli::kExitUsage);
    CHECK(ccspnet({"eval-sd"}).code == cli::kExitUsage);
    CHECK(ccspnet({"eval-sd", "--manifest", (dir / "none").string()}).code == cli::kExitData);

    std::filesystem::copy(dataset(), dir / "ds");
    {
      std::fstream f(dir / "ds" / "subject_001.eegt", std::ios::in | std::ios::out | std::ios::binary);
      f.write("JUNK", 4);
    }
    const auto r = ccspnet({"eval-sd", "--manifest", (dir / "ds").string(), "--out", (dir / "o").string()});
    CHECK(r.code == cli::kExitData);
    CHECK(r.err.find("subject_001.eegt") != std::string::npos);
    CHECK(ccspnet({"--help"}).code == cli::kExitOk);
    const auto help = ccspnet({"eval-sd", "--help"});
    CHECK(help.code == cli::kExitOk);
    CHECK(help.out.find("Usage:") == help.out.rfind("Usage:"));
  }

  TEST_CASE("stats on fixtures and CSVs") {
    auto r = ccspnet({"stats", "--fixtures"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("t=1.7679") != std::string::npos);
    CHECK(r.out.find("t=2.6621") != std::string::npos);
    CHECK(r.out.find("F(8,477)=") != std::string::npos);
    CHECK(r.out.find("published F=1.6945") != std::string::npos);
    CHECK(r.out.find("F(5,318)=2.9700") != std::string::npos);
    CHECK(r.out.find("paired SD vs SI") != std::string::npos);

    TempDir dir;
    {
      std::ofstream f(dir / "a.csv");
      f << "subject_id,approach,ablation,accuracy,seed\n1,SD,none,80,1\n2,SD,none,70,2\n3,SD,none,95,3\n";
    }
    std::filesystem::copy_file(dir / "a.csv", dir / "b.csv");
    r = ccspnet({"stats", "--csv", (dir / "a.csv").string(), "--csv", (dir / "b.csv").string(), "--out",
                 (dir / "report.txt").string()});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(r.out.find("paired a.csv vs b.csv: t=0.0000 df=2 p=1.0000") != std::string::npos);
    CHECK(slurp(dir / "report.txt") == r.out);

    {
      std::ofstream f(dir / "bad.csv");
      f << "subject,accuracy\n1,50\n";
    }
    CHECK(ccspnet({"stats", "--csv", (dir / "bad.csv").string()}).code == cli::kExitData);
    CHECK(ccspnet({"stats"}).code == cli::kExitUsage);
  }

  TEST_CASE("plot emitters") {
    TempDir out, plots;
    REQUIRE(ccspnet({"eval-sd", "--manifest", dataset().string(), "--out", out.path().string(), "--epochs", "10",
                     "--subjects", "1"})
                .code == 0);
    const auto model = (out / "models" / "subject_001.ccsp").string();

    auto r = ccspnet({"plot", "--csp-scatter", "--manifest", dataset().string(), "--model", model, "--subject", "1",
                      "--out", plots.path().string()});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const auto rows = read_csv(plots / "scatter.csv");
    CHECK(rows.size() == 4 * 10);  // 4 branches x 10 test trials
    // branch 1: centroid distance against within-class spread
    double sum[2][2] = {{0, 0}, {0, 0}}, sq[2] = {0, 0};
    int n[2] = {0, 0};
    std::vector<std::array<double, 3>> pts;
    for (const auto& row : rows) {
      if (row[0] != "1") continue;
      const int y = std::stoi(row[2]);
      const double px = std::stod(row[3]), py = std::stod(row[4]);
      sum[y][0] += px;
      sum[y][1] += py;
      n[y]++;
      pts.push_back({static_cast<double>(y), px, py});
    }
    REQUIRE(n[0] > 1);
    REQUIRE(n[1] > 1);
    double c[2][2];
    for (int y = 0; y < 2; ++y)
      for (int k = 0; k < 2; ++k) c[y][k] = sum[y][k] / n[y];
    for (const auto& p : pts) {
      const int y = static_cast<int>(p[0]);
      sq[y] += std::pow(p[1] - c[y][0], 2) + std::pow(p[2] - c[y][1], 2);
    }
    const double within = std::sqrt((sq[0] + sq[1]) / (n[0] + n[1] - 2));
    const double between = std::hypot(c[0][0] - c[1][0], c[0][1] - c[1][1]);
    CHECK(between > within);
    CHECK(well_formed(slurp(plots / "scatter.svg")));

    r = ccspnet({"plot", "--stft", "--manifest", dataset().string(), "--model", model, "--subject", "1", "--channel",
                 "2", "--out", plots.path().string()});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const auto stft = read_csv(plots / "stft.csv");
    std::map<std::string, int> stages;
    for (const auto& row : stft) stages[row[0]]++;
    CHECK(stages.size() == 3);
    CHECK(stages["wkcnn"] == 4 * stages["raw"]);
    CHECK(stages["tcnn"] == 4 * stages["raw"]);
    CHECK(well_formed(slurp(plots / "stft.svg")));

    CHECK(ccspnet({"plot", "--stft", "--manifest", dataset().string()}).code == cli::kExitUsage);
    CHECK(ccspnet({"plot", "--stft", "--manifest", dataset().string(), "--model", (out / "missing.ccsp").string()})
              .code == cli::kExitData);
    CHECK_FALSE(well_formed("<svg><rect></svg>"));
  }
}
