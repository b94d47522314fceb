#pragma once

#include <span>
#include <vector>

namespace ccsp::stats {

// I_x(a, b), continued fraction (modified Lentz).
double incomplete_beta(double a, double b, double x);
// P(T <= t) for Student's t with `df` degrees of freedom.
double student_t_cdf(double t, double df);
// P(F <= f) for the F distribution.
double f_cdf(double f, double d1, double d2);

struct TTest {
  double t = 0.0;
  double df = 0.0;
  double p_one_sided = 0.5;  // upper tail, P(T >= t)
  double p_two_sided = 1.0;
};

// Classic paired t on a - b, df = N - 1. All-zero differences give t = 0,
// p = 1; constant non-zero differences are a numerical error.
TTest paired_t(std::span<const double> a, std::span<const double> b);

// t = (m1 - m2) / sqrt(s1^2/n1 + s2^2/n2) with df = n1 + n2 - 2.
TTest unpaired_t_from_summary(double m1, double s1, int n1, double m2, double s2, int n2);
TTest unpaired_t(std::span<const double> a, std::span<const double> b);

struct GroupSummary {
  double mean = 0.0;
  double sd = 0.0;
  int n = 0;
};

struct Anova {
  double f = 0.0;
  double p = 1.0;
  int df_between = 0;
  int df_within = 0;
};

Anova anova_from_summary(std::span<const GroupSummary> groups);
Anova anova(const std::vector<std::vector<double>>& groups);

struct Summary {
  double mean = 0.0;
  double sd = 0.0;  // n - 1 denominator, 0 for a single value
  double median = 0.0;
  double range = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t n = 0;
};

Summary summarize(std::span<const double> values);
GroupSummary to_group(const Summary& s);

}  // namespace ccsp::stats
