#include <cmath>
#include <vector>

#include "ccsp/error.hpp"
#include "ccsp/fixtures.hpp"
#include "ccsp/stats.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace ccsp;

TEST_SUITE("stats") {
  TEST_CASE("t distribution agrees with quadrature") {
    for (double df : {5.0, 12.0, 53.0, 106.0}) {
      for (double t : {-2.5, -0.7, 0.0, 0.3, 1.7679, 2.6621, 4.0}) {
        const double upper = 1.0 - stats::student_t_cdf(t, df);
        CHECK(std::abs(upper - oracle::t_upper_tail(t, df)) < 1e-6);
      }
    }
  }

  TEST_CASE("F distribution agrees with quadrature") {
    for (auto [d1, d2] : std::vector<std::pair<double, double>>{{2, 20}, {3, 40}, {5, 318}, {8, 477}}) {
      for (double f : {0.2, 0.9, 1.6945, 2.97, 5.0}) {
        const double upper = 1.0 - stats::f_cdf(f, d1, d2);
        CHECK(std::abs(upper - oracle::f_upper_tail(f, d1, d2)) < 1e-6);
      }
    }
  }

  TEST_CASE("incomplete beta edge values") {
    CHECK(stats::incomplete_beta(2.0, 3.0, 0.0) == 0.0);
    CHECK(stats::incomplete_beta(2.0, 3.0, 1.0) == 1.0);
    // I_x(1, 1) = x and I_x(a, 1) = x^a
    CHECK(stats::incomplete_beta(1.0, 1.0, 0.37) == doctest::Approx(0.37).epsilon(1e-12));
    CHECK(stats::incomplete_beta(2.5, 1.0, 0.6) == doctest::Approx(std::pow(0.6, 2.5)).epsilon(1e-12));
    CHECK(stats::incomplete_beta(3.0, 4.0, 0.4) + stats::incomplete_beta(4.0, 3.0, 0.6) == doctest::Approx(1.0));
  }

  TEST_CASE("unpaired t from published summaries") {
    const auto& ccsp = fixtures::find_method(fixtures::sd_methods(), "CCSPNet");
    for (const auto& ref : {fixtures::kSdVsCsp, fixtures::kSdVsEegnet}) {
      const auto& other = fixtures::find_method(fixtures::sd_methods(), ref.versus);
      const auto r = stats::unpaired_t_from_summary(ccsp.mean, ccsp.sd, ccsp.n, other.mean, other.sd, other.n);
      CHECK(r.df == 106.0);
      CHECK(std::abs(r.t - ref.t) <= 0.001);
      CHECK(std::abs(r.p_one_sided - ref.p) <= 0.002);
      CHECK(r.p_two_sided == doctest::Approx(2.0 * r.p_one_sided));
    }
  }

  TEST_CASE("identical groups") {
    const std::vector<double> a{60, 70, 80, 90}, b = a;
    const auto t = stats::unpaired_t(a, b);
    CHECK(t.t == 0.0);
    CHECK(t.p_one_sided == doctest::Approx(0.5));
    const auto f = stats::anova({a, b, a});
    CHECK(f.f == 0.0);
    CHECK(f.p == doctest::Approx(1.0));
  }

  TEST_CASE("paired t conventions") {
    const std::vector<double> a{1, 2, 3}, b{2, 3, 4};
    CHECK_THROWS_AS(stats::paired_t(a, b), Error);
    try {
      (void)stats::paired_t(a, b);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::numerical);
    }
    const auto same = stats::paired_t(a, a);
    CHECK(same.t == 0.0);
    CHECK(same.p_two_sided == 1.0);
    CHECK_THROWS_AS(stats::paired_t(std::vector<double>{1, 2}, std::vector<double>{1}), Error);

    // d = (1, -1, 2, 0): mean 0.5, sd sqrt(5/3)
    const std::vector<double> x{3, 2, 5, 4}, y{2, 3, 3, 4};
    const auto r = stats::paired_t(x, y);
    CHECK(r.df == 3.0);
    CHECK(r.t == doctest::Approx(0.5 / (std::sqrt(5.0 / 3.0) / 2.0)));
    CHECK(r.p_one_sided == doctest::Approx(oracle::t_upper_tail(r.t, 3.0)).epsilon(1e-4));
  }

  TEST_CASE("paired test on the per-subject appendix columns") {
    const auto r = stats::paired_t(fixtures::appendix_sd(), fixtures::appendix_si());
    CHECK(r.df == 53.0);
    CHECK(std::abs(r.p_two_sided - oracle::t_upper_tail(std::abs(r.t), 53.0) * 2.0) < 1e-6);
  }

  TEST_CASE("t squared equals F for two groups") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> d(70.0, 15.0);
    for (int rep = 0; rep < 20; ++rep) {
      const std::size_t n = 5 + static_cast<std::size_t>(rep);
      std::vector<double> a(n), b(n);
      for (auto& v : a) v = d(rng);
      for (auto& v : b) v = d(rng) + 3.0;
      const auto t = stats::unpaired_t(a, b);
      const auto f = stats::anova({a, b});
      CHECK(std::abs(t.t * t.t - f.f) < 1e-9 * std::max(1.0, f.f));
      CHECK(f.df_between == 1);
      CHECK(f.df_within == static_cast<int>(2 * n - 2));
      CHECK(std::abs(f.p - t.p_two_sided) < 1e-9);
    }
  }

  TEST_CASE("ANOVA from published summaries") {
    const auto sd = stats::anova_from_summary(fixtures::as_groups(fixtures::sd_methods()));
    CHECK(sd.df_between == 8);
    CHECK(sd.df_within == 477);
    CHECK(std::abs(sd.p - fixtures::kSdAnova.p) <= 0.02);
    const auto si = stats::anova_from_summary(fixtures::as_groups(fixtures::si_methods()));
    CHECK(si.df_between == 5);
    CHECK(si.df_within == 318);
    CHECK(std::abs(si.f - fixtures::kSiAnova.f) <= 0.005);
    CHECK(std::abs(si.p - fixtures::kSiAnova.p) <= 0.02);
  }

  TEST_CASE("ANOVA from raw groups matches the summary form") {
    const std::vector<std::vector<double>> g{{1, 2, 3, 4}, {2, 4, 6}, {5, 5, 6, 7, 9}};
    const auto raw = stats::anova(g);
    std::vector<stats::GroupSummary> s;
    for (const auto& x : g) s.push_back(stats::to_group(stats::summarize(x)));
    const auto sum = stats::anova_from_summary(s);
    CHECK(raw.f == doctest::Approx(sum.f).epsilon(1e-12));
    // hand computation: grand mean 54/12 = 4.5
    const double ssb = 4 * std::pow(2.5 - 4.5, 2) + 3 * std::pow(4.0 - 4.5, 2) + 5 * std::pow(6.4 - 4.5, 2);
    const double ssw = 5.0 + 8.0 + 11.2;
    CHECK(raw.f == doctest::Approx((ssb / 2.0) / (ssw / 9.0)));
    CHECK(raw.p == doctest::Approx(oracle::f_upper_tail(raw.f, 2.0, 9.0)).epsilon(1e-6));
  }

  TEST_CASE("appendix summaries") {
    const auto sd = stats::summarize(fixtures::appendix_sd());
    CHECK(sd.n == 54);
    CHECK(std::abs(sd.mean - 74.41) < 0.01);
    CHECK(std::abs(sd.sd - 16.75) < 0.01);
    CHECK(sd.median == 68.5);
    CHECK(sd.range == 53.0);
    CHECK(sd.min == 47.0);
    CHECK(sd.max == 100.0);
    const auto si = stats::summarize(fixtures::appendix_si());
    CHECK(std::abs(si.mean - 74.28) < 0.01);
    CHECK(std::abs(si.sd - 16.12) < 0.01);
    CHECK(si.median == 73.0);
    CHECK(si.range == 51.0);
    CHECK(si.min == 49.0);
    CHECK(si.max == 100.0);
  }

  TEST_CASE("single value summary") {
    const std::vector<double> v{42.5};
    const auto s = stats::summarize(v);
    CHECK(s.mean == 42.5);
    CHECK(s.sd == 0.0);
    CHECK(s.median == 42.5);
    CHECK(s.range == 0.0);
    CHECK_THROWS_AS(stats::summarize(std::vector<double>{}), Error);
  }

  TEST_CASE("fixture tables") {
    CHECK(fixtures::sd_methods().size() == 9);
    CHECK(fixtures::si_methods().size() == 6);
    CHECK(fixtures::sd_methods().back().name == "CCSPNet");
    CHECK(fixtures::appendix_sd().size() == 54);
    CHECK(fixtures::appendix_si().size() == 54);
    CHECK_THROWS_AS(fixtures::find_method(fixtures::sd_methods(), "nope"), Error);
    for (const auto& m : fixtures::sd_ablations()) CHECK(m.mean < fixtures::sd_methods().back().mean);
    CHECK_FALSE(fixtures::training_grid().empty());
  }
}
