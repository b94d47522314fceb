#include <random>

#include <Eigen/Eigenvalues>

#include "ccsp/csp.hpp"
#include "ccsp/error.hpp"
#include "ccsp/lda.hpp"
#include "doctest.h"

using namespace ccsp;

namespace {

Matrix random_spd(Eigen::Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  Matrix a(c, 2 * c);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = d(rng);
  Matrix s = a * a.transpose() / static_cast<double>(2 * c);
  s.diagonal().array() += 0.05;
  return s;
}

double max_column_residual(const Matrix& a, const Matrix& b, const csp::CspSolution& sol) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < sol.w.cols(); ++j) {
    const Vector r = a * sol.w.col(j) - sol.eigenvalues(j) * (a + b) * sol.w.col(j);
    worst = std::max(worst, r.norm());
  }
  return worst;
}

}  // namespace

TEST_SUITE("csp") {
  TEST_CASE("generalized eigen-residual on random SPD pairs") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 100; ++trial) {
      const Eigen::Index c = 2 + trial % 15;
      const Matrix s0 = random_spd(c, rng), s1 = random_spd(c, rng);
      const auto sol = csp::solve_csp(s0, s1);
      CHECK(max_column_residual(s0, s1, sol) < 1e-8);
      const Matrix white = sol.w.transpose() * (s0 + s1) * sol.w;
      CHECK((white - Matrix::Identity(c, c)).cwiseAbs().maxCoeff() < 1e-8);
      for (Eigen::Index j = 0; j + 1 < c; ++j) CHECK(sol.eigenvalues(j) >= sol.eigenvalues(j + 1));
      CHECK(sol.eigenvalues.minCoeff() >= -1e-12);
      CHECK(sol.eigenvalues.maxCoeff() <= 1.0 + 1e-12);
      for (Eigen::Index j = 0; j < c; ++j) {
        Eigen::Index at = 0;
        sol.w.col(j).cwiseAbs().maxCoeff(&at);
        CHECK(sol.w(at, j) > 0.0);
      }
      // Independent generalized solver.
      Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ref(s0, s0 + s1);
      Vector expect = ref.eigenvalues().reverse();
      CHECK((expect - sol.eigenvalues).cwiseAbs().maxCoeff() < 1e-9);
    }
  }

  TEST_CASE("ridge shifts the composite only") {
    std::mt19937_64 rng(22);
    const Matrix s0 = random_spd(5, rng), s1 = random_spd(5, rng);
    const auto sol = csp::solve_csp(s0, s1, 0.1);
    const Matrix comp = s0 + s1 + 0.1 * Matrix::Identity(5, 5);
    for (Eigen::Index j = 0; j < 5; ++j) {
      CHECK((s0 * sol.w.col(j) - sol.eigenvalues(j) * comp * sol.w.col(j)).norm() < 1e-9);
    }
  }

  TEST_CASE("non-positive-definite composite is a numerical error") {
    const Matrix z = Matrix::Zero(3, 3);
    try {
      (void)csp::solve_csp(z, z);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::numerical);
    }
  }

  TEST_CASE("reduce_projection picks the first two and last two columns") {
    Matrix w(3, 6);
    for (Eigen::Index j = 0; j < 6; ++j) w.col(j).setConstant(static_cast<double>(j));
    const Matrix r = csp::reduce_projection(w);
    CHECK(r.cols() == 4);
    CHECK(r(0, 0) == 0.0);
    CHECK(r(0, 1) == 1.0);
    CHECK(r(0, 2) == 4.0);
    CHECK(r(0, 3) == 5.0);
    CHECK_THROWS_AS(csp::reduce_projection(Matrix::Zero(3, 3)), Error);
  }

  TEST_CASE("class covariances are trace-normalized class means") {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> d(0.0, 1.0);
    const std::size_t n = 6, c = 3, t = 20;
    std::vector<double> x(n * c * t);
    for (auto& v : x) v = d(rng);
    const std::vector<int> y{0, 1, 0, 1, 1, 0};
    const auto cov = csp::class_covariances(x, n, c, t, y);
    Matrix expect[2] = {Matrix::Zero(3, 3), Matrix::Zero(3, 3)};
    for (std::size_t i = 0; i < n; ++i) {
      Matrix m = Matrix::Zero(3, 3);
      for (std::size_t a = 0; a < c; ++a)
        for (std::size_t b = 0; b < c; ++b)
          for (std::size_t k = 0; k < t; ++k)
            m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) += x[(i * c + a) * t + k] * x[(i * c + b) * t + k];
      expect[y[i]] += m / m.trace() / 3.0;
    }
    CHECK((cov.sigma0 - expect[0]).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((cov.sigma1 - expect[1]).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(cov.sigma0.trace() == doctest::Approx(1.0));
    CHECK_THROWS_AS(csp::class_covariances(x, n, c, t, std::vector<int>(n, 0)), Error);
  }

  TEST_CASE("leading filters carry label-1 variance") {
    std::mt19937_64 rng(24);
    std::normal_distribution<double> d(0.0, 1.0);
    const std::size_t n = 40, c = 4, t = 50;
    std::vector<double> x(n * c * t);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<int>(i % 2);
      for (std::size_t ch = 0; ch < c; ++ch) {
        const double gain = ch == 0 && y[i] == 1 ? 3.0 : (ch == 3 && y[i] == 0 ? 3.0 : 1.0);
        for (std::size_t k = 0; k < t; ++k) x[(i * c + ch) * t + k] = gain * d(rng);
      }
    }
    ad::Tensor maps({n, 1, c, t}, x);
    const auto br = csp::fit_branch(maps, 0, y);
    const Matrix f = csp::spatial_filter_features(x, n, c, t, br.w_r);
    double m1 = 0.0, m0 = 0.0;
    for (std::size_t i = 0; i < n; ++i) (y[i] == 1 ? m1 : m0) += f(static_cast<Eigen::Index>(i), 0) - f(static_cast<Eigen::Index>(i), 3);
    CHECK(m1 > 0.0);
    CHECK(m0 < 0.0);
  }

  TEST_CASE("loss targets") {
    const auto t = csp::loss_targets(std::vector<int>{1, 0}, 2);
    CHECK(t.shape() == ad::Shape{2, 2, 4});
    CHECK(t[0] == 1.0);
    CHECK(t[2] == 0.0);
    CHECK(t[8] == 0.0);
    CHECK(t[11] == 1.0);
  }
}

TEST_SUITE("lda") {
  TEST_CASE("fitted direction beats random directions on Fisher J") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> d(0.0, 1.0);
    for (int set = 0; set < 100; ++set) {
      const Eigen::Index dim = 2 + set % 7, n = 40;
      Matrix mix = Matrix::Random(dim, dim) + 2.0 * Matrix::Identity(dim, dim);
      Vector shift(dim);
      for (Eigen::Index j = 0; j < dim; ++j) shift(j) = d(rng);
      Matrix x(n, dim);
      std::vector<int> y(static_cast<std::size_t>(n));
      for (Eigen::Index i = 0; i < n; ++i) {
        y[static_cast<std::size_t>(i)] = static_cast<int>(i % 2);
        Vector z(dim);
        for (Eigen::Index j = 0; j < dim; ++j) z(j) = d(rng);
        x.row(i) = (mix * z + (y[static_cast<std::size_t>(i)] == 1 ? Vector(2.0 * shift) : Vector(Vector::Zero(dim)))).transpose();
      }
      const auto model = lda::fit(x, y);
      CHECK(model.w.norm() == doctest::Approx(1.0));
      CHECK(model.mu1 > model.mu0);
      const auto j_of = [&](const Vector& w) {
        const Vector p = x * w;
        return lda::fisher_criterion(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())), y);
      };
      const double best = j_of(model.w);
      for (int r = 0; r < 50; ++r) {
        Vector w(dim);
        for (Eigen::Index j = 0; j < dim; ++j) w(j) = d(rng);
        CHECK(best <= j_of(w) + 1e-12);
      }
    }
  }

  TEST_CASE("zero within-class scatter falls back to the mean gap") {
    Matrix x(4, 2);
    x << 0, 0, 0, 0, 1, 2, 1, 2;
    const auto m = lda::fit(x, std::vector<int>{0, 0, 1, 1});
    CHECK(m.w(0) == doctest::Approx(1.0 / std::sqrt(5.0)));
    CHECK(m.w(1) == doctest::Approx(2.0 / std::sqrt(5.0)));
  }

  TEST_CASE("nearest-mean prediction with ties to class 0") {
    lda::LdaModel m;
    m.w = Vector::Ones(1);
    m.mu0 = 0.0;
    m.mu1 = 2.0;
    m.fitted = true;
    Matrix x(3, 1);
    x << -1.0, 1.0, 1.5;
    CHECK(lda::predict(m, x) == std::vector<int>{0, 0, 1});
  }

  TEST_CASE("combined loss") {
    CHECK(lda::combined_loss(2.0, 4.0, 0.3) == doctest::Approx(0.6 + 2.8));
    CHECK_THROWS_AS(lda::combined_loss(1.0, 1.0, 1.5), Error);
  }

  TEST_CASE("single-class input is rejected") {
    CHECK_THROWS_AS(lda::fit(Matrix::Random(4, 2), std::vector<int>{1, 1, 1, 1}), Error);
  }
}
