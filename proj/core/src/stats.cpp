#include "ccsp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "ccsp/error.hpp"

namespace ccsp::stats {

namespace {

double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw_numerical(fmt::format("incomplete beta did not converge (a={}, b={}, x={})", a, b, x));
}

double mean_of(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

double sample_var(std::span<const double> v, double mean) {
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

TTest finish_t(double t, double df) {
  TTest r;
  r.t = t;
  r.df = df;
  const double tail = 0.5 * incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
  r.p_one_sided = t >= 0.0 ? tail : 1.0 - tail;
  r.p_two_sided = std::min(1.0, 2.0 * tail);
  return r;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw_invalid("incomplete_beta: a and b must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw_invalid(fmt::format("incomplete_beta: x={} outside [0, 1]", x));
  if (x == 0.0 || x == 1.0) return x;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
  if (!(df > 0.0)) throw_invalid("student_t_cdf: df must be positive");
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double x = df / (df + t * t);
  const double tail = 0.5 * incomplete_beta(df / 2.0, 0.5, x);
  return t >= 0.0 ? 1.0 - tail : tail;
}

double f_cdf(double f, double d1, double d2) {
  if (!(d1 > 0.0) || !(d2 > 0.0)) throw_invalid("f_cdf: degrees of freedom must be positive");
  if (f <= 0.0) return 0.0;
  return incomplete_beta(d1 / 2.0, d2 / 2.0, d1 * f / (d1 * f + d2));
}

TTest paired_t(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw_invalid(fmt::format("paired_t: {} vs {} values", a.size(), b.size()));
  if (a.size() < 2) throw_invalid("paired_t: need at least two pairs");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const double md = mean_of(d);
  const double var = sample_var(d, md);
  const double df = static_cast<double>(d.size() - 1);
  if (var == 0.0) {
    if (md == 0.0) return TTest{0.0, df, 0.5, 1.0};
    throw_numerical("paired_t: differences have zero variance");
  }
  return finish_t(md / std::sqrt(var / static_cast<double>(d.size())), df);
}

TTest unpaired_t_from_summary(double m1, double s1, int n1, double m2, double s2, int n2) {
  if (n1 < 2 || n2 < 2) throw_invalid("unpaired_t: each group needs n >= 2");
  if (s1 < 0.0 || s2 < 0.0) throw_invalid("unpaired_t: standard deviations must be non-negative");
  const double se2 = s1 * s1 / n1 + s2 * s2 / n2;
  if (se2 == 0.0) throw_numerical("unpaired_t: zero combined variance");
  return finish_t((m1 - m2) / std::sqrt(se2), static_cast<double>(n1 + n2 - 2));
}

TTest unpaired_t(std::span<const double> a, std::span<const double> b) {
  const auto sa = summarize(a);
  const auto sb = summarize(b);
  return unpaired_t_from_summary(sa.mean, sa.sd, static_cast<int>(sa.n), sb.mean, sb.sd, static_cast<int>(sb.n));
}

Anova anova_from_summary(std::span<const GroupSummary> groups) {
  if (groups.size() < 2) throw_invalid("anova: need at least two groups");
  double total_n = 0.0, grand = 0.0;
  for (const auto& g : groups) {
    if (g.n < 2) throw_invalid("anova: each group needs n >= 2");
    if (g.sd < 0.0) throw_invalid("anova: standard deviations must be non-negative");
    total_n += g.n;
    grand += g.n * g.mean;
  }
  grand /= total_n;
  double ss_between = 0.0, ss_within = 0.0;
  for (const auto& g : groups) {
    ss_between += g.n * (g.mean - grand) * (g.mean - grand);
    ss_within += (g.n - 1) * g.sd * g.sd;
  }
  if (ss_within == 0.0) throw_numerical("anova: zero within-group sum of squares");
  Anova r;
  r.df_between = static_cast<int>(groups.size()) - 1;
  r.df_within = static_cast<int>(total_n) - static_cast<int>(groups.size());
  r.f = (ss_between / r.df_between) / (ss_within / r.df_within);
  r.p = 1.0 - f_cdf(r.f, r.df_between, r.df_within);
  return r;
}

Anova anova(const std::vector<std::vector<double>>& groups) {
  std::vector<GroupSummary> s;
  for (const auto& g : groups) s.push_back(to_group(summarize(g)));
  return anova_from_summary(s);
}

Summary summarize(std::span<const double> values) {
  if (values.empty()) throw_invalid("summarize: no values");
  Summary s;
  s.n = values.size();
  s.mean = mean_of(values);
  s.sd = s.n > 1 ? std::sqrt(sample_var(values, s.mean)) : 0.0;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = s.n / 2;
  s.median = s.n % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  s.min = sorted.front();
  s.max = sorted.back();
  s.range = s.max - s.min;
  return s;
}

GroupSummary to_group(const Summary& s) { return GroupSummary{s.mean, s.sd, static_cast<int>(s.n)}; }

}  // namespace ccsp::stats
