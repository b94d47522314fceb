#include <cmath>

#include "ccsp/baseline.hpp"
#include "ccsp/dsp.hpp"
#include "ccsp/error.hpp"
#include "ccsp/model.hpp"
#include "ccsp/splits.hpp"
#include "doctest.h"
#include "fixtures_small.hpp"

using namespace ccsp;

namespace {

std::vector<double> snapshot(Model& m) {
  std::vector<double> out;
  const auto add = [&out](const ad::Var& v) {
    if (v.defined()) out.insert(out.end(), v.value().storage().begin(), v.value().storage().end());
  };
  add(m.wavelet_params());
  add(m.temporal_kernels());
  add(m.temporal_bias());
  for (auto& n : m.spectral_norms()) {
    add(n.gamma);
    add(n.beta);
  }
  for (auto& d : m.dense_layers()) {
    add(d.w);
    add(d.b);
  }
  for (auto& n : m.dense_norms()) {
    add(n.gamma);
    add(n.beta);
  }
  return out;
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("config validation and text round-trip") {
    ModelConfig c;
    CHECK_NOTHROW(c.validate());
    KvSection s;
    c.write(s);
    CHECK(ModelConfig::read(s, "test") == c);
    c.n_temporal_kernels = 3;
    CHECK_THROWS_AS(c.validate(), Error);
    ModelConfig d;
    d.dense_dims = {12, 8, 4};
    CHECK_THROWS_AS(d.validate(), Error);
    ModelConfig e;
    e.loss_ratio = 1.5;
    CHECK_THROWS_AS(e.validate(), Error);
    CHECK(parse_ablation("frn") == Ablation::frn);
    CHECK_THROWS_AS(parse_ablation("conv"), Error);
  }

  TEST_CASE("spectral stage shapes and wavelet initialization") {
    Model m(ModelConfig{});
    const auto& w = m.wavelet_params().value();
    CHECK(w[0] == doctest::Approx(8.0));
    CHECK(w[3] == doctest::Approx(8.0 + 22.0 / 3.0));
    CHECK(w[6] == doctest::Approx(8.0 + 44.0 / 3.0));
    CHECK(w[9] == doctest::Approx(30.0));
    CHECK(w[1] == 0.25);
    CHECK(w[2] == doctest::Approx(4.0 * std::log(2.0)));
    const auto out = m.forward_spectral(ad::Var::constant(ad::Tensor({2, 1, 62, 250})), ad::BnMode::train);
    CHECK(out.shape() == ad::Shape{2, 4, 62, 250});
  }

  TEST_CASE("zero input gives exactly zero maps when beta is zero") {
    Model m(small::model_config());
    m.temporal_bias().mutable_value() = ad::Tensor(m.temporal_bias().shape());
    const auto out = m.forward_spectral(ad::Var::constant(ad::Tensor({3, 1, 6, 40})), ad::BnMode::train);
    for (double v : out.value().storage()) CHECK(v == 0.0);
  }

  TEST_CASE("zero learning rates leave parameters unchanged") {
    auto cfg = small::model_config();
    cfg.lr_wavelet = 0.0;
    cfg.lr_main = 0.0;
    Model m(cfg);
    const auto b = small::random_batch(12, 6, 40, 1);
    const auto before = snapshot(m);
    m.train_step(Batch{b.x, b.n, b.y});
    CHECK(snapshot(m) == before);
  }

  TEST_CASE("with r = 1 the dense network receives no gradient") {
    auto cfg = small::model_config();
    cfg.loss_ratio = 1.0;
    Model m(cfg);
    const auto b = small::random_batch(12, 6, 40, 2);
    m.train_step(Batch{b.x, b.n, b.y});
    for (auto& d : m.dense_layers()) {
      const auto gw = d.w.grad();
      const auto gb = d.b.grad();
      for (double g : gw.storage()) CHECK(g == 0.0);
      for (double g : gb.storage()) CHECK(g == 0.0);
    }
    double temporal = 0.0;
    const auto gt = m.temporal_kernels().grad();
    for (double g : gt.storage()) temporal += std::abs(g);
    CHECK(temporal > 0.0);
  }

  TEST_CASE("single-class batches are rejected") {
    Model m(small::model_config());
    auto b = small::random_batch(8, 6, 40, 3);
    std::fill(b.y.begin(), b.y.end(), 1);
    CHECK_THROWS_AS(m.train_step(Batch{b.x, b.n, b.y}), Error);
  }

  TEST_CASE("wavelet frequencies stay within [8, 30] Hz") {
    auto cfg = small::model_config();
    cfg.lr_wavelet = 25.0;
    Model m(cfg);
    const auto b = small::random_batch(16, 6, 40, 4);
    for (int step = 0; step < 6; ++step) {
      m.train_step(Batch{b.x, b.n, b.y});
      const auto& w = m.wavelet_params().value();
      for (std::size_t k = 0; k < 4; ++k) {
        CHECK(w[k * 3] >= dsp::kMinWaveletHz);
        CHECK(w[k * 3] <= dsp::kMaxWaveletHz);
        CHECK(w[k * 3 + 1] >= dsp::kMinWaveletWidth);
      }
    }
  }

  TEST_CASE("end-to-end loss gradient with frozen filters") {
    auto cfg = small::model_config(6, 40);
    Model m(cfg);
    const auto b = small::random_batch(8, 6, 40, 5);
    const auto input = ad::Var::constant(ad::Tensor({8, 1, 6, 40}, b.x));
    const auto maps = m.forward_spectral(input, ad::BnMode::train);
    std::vector<Matrix> filters;
    for (std::size_t k = 0; k < 4; ++k) filters.push_back(csp::fit_branch(maps.value(), k, b.y).w_r);
    const auto loss_of = [&](ad::BnMode mode) {
      return csp::csp_loss(csp::spatial_filter_features(m.forward_spectral(input, mode), filters), b.y);
    };
    const auto loss = loss_of(ad::BnMode::train);
    ad::backward(loss);
    const auto check = [&](ad::Var& param) {
      const auto analytic = param.grad();
      double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
      for (std::size_t i = 0; i < analytic.size(); ++i) {
        auto& v = param.mutable_value()[i];
        const double saved = v;
        const double h = 1e-6 * std::max(1.0, std::abs(saved));
        v = saved + h;
        const double up = loss_of(ad::BnMode::train).value().item();
        v = saved - h;
        const double down = loss_of(ad::BnMode::train).value().item();
        v = saved;
        const double numeric = (up - down) / (2.0 * h);
        diff2 += (analytic[i] - numeric) * (analytic[i] - numeric);
        a2 += analytic[i] * analytic[i];
        n2 += numeric * numeric;
      }
      return std::sqrt(diff2) / (std::sqrt(a2) + std::sqrt(n2));
    };
    CHECK(check(m.wavelet_params()) < 1e-3);
    CHECK(check(m.temporal_kernels()) < 1e-3);
  }

  TEST_CASE("relabeling the classes leaves the loss trajectory unchanged") {
    const auto b = small::random_batch(16, 6, 40, 6);
    std::vector<int> flipped(b.y.size());
    for (std::size_t i = 0; i < b.y.size(); ++i) flipped[i] = 1 - b.y[i];
    Model a(small::model_config()), c(small::model_config());
    for (int step = 0; step < 4; ++step) {
      const double la = a.train_step(Batch{b.x, b.n, b.y}).csp_loss;
      const double lc = c.train_step(Batch{b.x, b.n, flipped}).csp_loss;
      // the covariance ridge breaks exact complementarity at the 1e-7 level
      CHECK(std::abs(la) == doctest::Approx(std::abs(lc)).epsilon(1e-5));
    }
  }

  TEST_CASE("training, finalize and prediction") {
    const auto subject = small::synthetic_subject();
    const auto split = data::split_sd(subject);
    auto cfg = small::model_config(8, 250);
    cfg.wavelet_len = 32;
    cfg.temporal_len = 64;
    cfg.epochs = 10;
    cfg.batch_size = 300;
    Model m(cfg);
    const auto x = split.train.to_f64();
    const auto xt = split.test.to_f64();
    CHECK_THROWS_AS((void)m.predict(xt, split.test.size()), Error);
    m.train(x, split.train.size(), split.train.labels());
    REQUIRE(m.history().size() == 10);
    CHECK(m.history().back().csp_loss < m.history().front().csp_loss);

    m.finalize(x, split.train.size(), split.train.labels());
    REQUIRE(m.finalized());
    CHECK(m.frozen().filters.size() == 4);
    for (const auto& f : m.frozen().filters) {
      CHECK(f.rows() == 8);
      CHECK(f.cols() == 4);
    }
    const auto train_pred = m.predict(x, split.train.size());
    CHECK(eval::accuracy(train_pred, split.train.labels()) >= 0.85);
    const auto test_pred = m.predict(xt, split.test.size());
    CHECK(eval::accuracy(test_pred, split.test.labels()) >= 0.8);
    CHECK(m.predict(xt, split.test.size()) == test_pred);

    // one trial at a time
    const std::size_t trial = 8 * 250;
    for (std::size_t i = 0; i < split.test.size(); ++i) {
      const auto one = m.predict(std::span<const double>(xt).subspan(i * trial, trial), 1);
      CHECK(one[0] == test_pred[i]);
    }

    m.finalize(x, split.train.size(), split.train.labels());
    CHECK(m.predict(x, split.train.size()) == train_pred);
  }

  TEST_CASE("parameter accounting") {
    Model full(ModelConfig{});
    const auto r = full.count_parameters();
    CHECK(r.count("wavelet") == 12);
    CHECK(r.count("temporal kernels") == 4 * 64 + 4);
    CHECK(r.count("batch-norm 2d") == 16);
    CHECK(r.count("dense") == 16 * 16 + 16 + 16 * 8 + 8 + 8 * 4 + 4);
    CHECK(r.count("batch-norm 1d") == 2 * 16 + 2 * 8);
    CHECK(r.count("csp (frozen)") == 992);
    CHECK(r.count("lda (frozen)") == 6);
    CHECK(r.total == 12 + 260 + 16 + 444 + 48 + 992 + 6);
    CHECK(r.to_text().find("5036") != std::string::npos);
    for (auto a : {Ablation::wkcnn, Ablation::tcnn, Ablation::frn, Ablation::lda}) {
      ModelConfig c;
      c.ablation = a;
      Model m(c);
      CHECK(m.count_parameters().trainable < r.trainable);
      CHECK(m.count_parameters().total < r.total);
    }
  }

  TEST_CASE("ablated variants train and predict") {
    const auto b = small::random_batch(24, 6, 40, 7);
    for (auto a : {Ablation::wkcnn, Ablation::tcnn, Ablation::frn, Ablation::lda}) {
      auto cfg = small::model_config();
      cfg.ablation = a;
      Model m(cfg);
      m.train(b.x, b.n, b.y);
      m.finalize(b.x, b.n, b.y);
      CHECK(m.predict(b.x, b.n).size() == b.n);
    }
  }
}
