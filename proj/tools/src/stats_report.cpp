#include "stats_report.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>

#include "ccsp/error.hpp"
#include "ccsp/fixtures.hpp"
#include "ccsp/harness.hpp"
#include "ccsp/stats.hpp"

namespace ccsp::cli {

namespace {

std::string summary_line(std::string_view name, const stats::Summary& s) {
  return fmt::format("summary {}: mean={:.2f} sd={:.2f} median={:g} range={:g} ({:g}-{:g}) n={}\n", name, s.mean, s.sd,
                     s.median, s.range, s.min, s.max, s.n);
}

std::string t_line(std::string_view label, const stats::TTest& t) {
  return fmt::format("{}: t={:.4f} df={:g} p={:.4f} (two-sided {:.4f})", label, t.t, t.df, t.p_one_sided,
                     t.p_two_sided);
}

std::string paired_line(std::string_view label, const stats::TTest& t) {
  return fmt::format("{}: t={:.4f} df={:g} p={:.4f} (one-sided {:.4f})", label, t.t, t.df, t.p_two_sided,
                     t.p_one_sided);
}

std::string anova_line(std::string_view label, const stats::Anova& a) {
  return fmt::format("{}: F({},{})={:.4f} p={:.4f}", label, a.df_between, a.df_within, a.f, a.p);
}

void unpaired_block(std::string& out, std::string_view approach, std::span<const fixtures::MethodSummary> table) {
  const auto& ours = table.back();
  for (const auto& m : table.first(table.size() - 1)) {
    const auto t = stats::unpaired_t_from_summary(ours.mean, ours.sd, ours.n, m.mean, m.sd, m.n);
    out += t_line(fmt::format("t-test {} {} vs {}", approach, ours.name, m.name), t);
    for (const auto& ref : {fixtures::kSdVsCsp, fixtures::kSdVsEegnet}) {
      if (approach == "SD" && m.name == ref.versus) out += fmt::format(" [published t={:.4f} p={:.4f}]", ref.t, ref.p);
    }
    out += '\n';
  }
}

// Runs `line`; a degenerate input (zero variance) becomes an "undefined" row.
template <typename F>
std::string guarded(std::string_view label, F&& line) {
  try {
    return line();
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::numerical) throw;
    return fmt::format("{}: undefined ({})", label, e.what());
  }
}

}  // namespace

std::string fixtures_report() {
  std::string out;
  out += "# unpaired t-tests against CCSPNet from published summaries (df = n1 + n2 - 2, p upper tail)\n";
  unpaired_block(out, "SD", fixtures::sd_methods());
  unpaired_block(out, "SI", fixtures::si_methods());
  out += "# one-way ANOVA over the published method summaries\n";
  const auto sd = stats::anova_from_summary(fixtures::as_groups(fixtures::sd_methods()));
  const auto si = stats::anova_from_summary(fixtures::as_groups(fixtures::si_methods()));
  out += anova_line("anova SD", sd) +
         fmt::format(" [published F={:.4f} p={:.4f}]\n", fixtures::kSdAnova.f, fixtures::kSdAnova.p);
  out += anova_line("anova SI", si) +
         fmt::format(" [published F={:.4f} p={:.4f}]\n", fixtures::kSiAnova.f, fixtures::kSiAnova.p);
  out += "# paired t-test on the per-subject appendix columns (p two-sided)\n";
  out += paired_line("paired SD vs SI", stats::paired_t(fixtures::appendix_sd(), fixtures::appendix_si())) +
         fmt::format(" [published p={:.2f}]\n", fixtures::kPairedSdSiP);
  out += "# per-subject appendix summaries\n";
  out += summary_line("SD", stats::summarize(fixtures::appendix_sd()));
  out += summary_line("SI", stats::summarize(fixtures::appendix_si()));
  return out;
}

std::string csv_report(const std::vector<std::filesystem::path>& csvs) {
  if (csvs.empty()) throw_invalid("stats: no CSV files given");
  struct Column {
    std::string name;
    std::map<int, double> by_subject;
    std::vector<double> values;
  };
  std::vector<Column> cols;
  for (const auto& path : csvs) {
    Column c;
    c.name = path.filename().string();
    for (const auto& row : eval::read_results_csv(path)) {
      if (!c.by_subject.emplace(row.subject, row.accuracy).second) {
        throw_data(fmt::format("{}: duplicate subject {}", path.string(), row.subject));
      }
      c.values.push_back(row.accuracy);
    }
    if (c.values.empty()) throw_data(fmt::format("{}: no rows", path.string()));
    cols.push_back(std::move(c));
  }

  std::string out = "# per-file accuracy summaries\n";
  for (const auto& c : cols) out += summary_line(c.name, stats::summarize(c.values));
  if (cols.size() < 2) return out;

  out += "# first file against each other file\n";
  const auto& first = cols.front();
  for (std::size_t i = 1; i < cols.size(); ++i) {
    const auto& other = cols[i];
    std::vector<double> a, b;
    for (const auto& [subject, acc] : first.by_subject) {
      if (const auto it = other.by_subject.find(subject); it != other.by_subject.end()) {
        a.push_back(acc);
        b.push_back(it->second);
      }
    }
    const auto label = fmt::format("{} vs {}", first.name, other.name);
    if (a.size() >= 2) {
      out += guarded("paired " + label, [&] { return paired_line("paired " + label, stats::paired_t(a, b)); }) +
             fmt::format(" [{} common subjects]\n", a.size());
    } else {
      out += fmt::format("paired {}: skipped, fewer than 2 common subjects\n", label);
    }
    if (first.values.size() >= 2 && other.values.size() >= 2) {
      out += guarded("t-test " + label,
                     [&] { return t_line("t-test " + label, stats::unpaired_t(first.values, other.values)); }) +
             '\n';
    }
  }
  const bool groups_ok = std::all_of(cols.begin(), cols.end(), [](const Column& c) { return c.values.size() >= 2; });
  if (groups_ok) {
    std::vector<std::vector<double>> groups;
    for (const auto& c : cols) groups.push_back(c.values);
    out += "# one-way ANOVA over all files\n" +
           guarded("anova", [&] { return anova_line("anova", stats::anova(groups)); }) + '\n';
  }
  return out;
}

}  // namespace ccsp::cli
