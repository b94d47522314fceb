#include "ccsp/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "ccsp/dsp.hpp"
#include "ccsp/error.hpp"

namespace ccsp {

namespace {

constexpr std::size_t kEvalChunk = 128;

bool both_classes(std::span<const int> labels) {
  bool seen[2] = {false, false};
  for (int y : labels) {
    if (y == 0 || y == 1) seen[y] = true;
  }
  return seen[0] && seen[1];
}

ad::Tensor uniform_tensor(ad::Shape shape, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  ad::Tensor t(std::move(shape));
  for (auto& v : t.storage()) v = dist(rng);
  return t;
}

// Per-feature mean and unbiased variance along axis 1 of rank-2 or rank-4
// tensors, accumulated over chunks.
class MomentAccumulator {
 public:
  void add(const ad::Tensor& x) {
    const std::size_t n = x.dim(0), f = x.dim(1);
    const std::size_t inner = x.size() / (n * f);
    if (sum_.empty()) {
      sum_.assign(f, 0.0);
      sq_.assign(f, 0.0);
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < f; ++j) {
        const double* p = x.raw() + (i * f + j) * inner;
        for (std::size_t q = 0; q < inner; ++q) {
          sum_[j] += p[q];
          sq_[j] += p[q] * p[q];
        }
      }
    count_ += static_cast<double>(n * inner);
  }

  void store(ad::BatchNormStats& stats) const {
    if (count_ < 2.0) throw_invalid("batch-norm recalibration needs at least two values per feature");
    for (std::size_t j = 0; j < sum_.size(); ++j) {
      const double mean = sum_[j] / count_;
      stats.mean[j] = mean;
      stats.var[j] = std::max(0.0, (sq_[j] - count_ * mean * mean) / (count_ - 1.0));
    }
  }

 private:
  std::vector<double> sum_, sq_;
  double count_ = 0.0;
};

NormLayer make_norm(std::size_t features, const std::string& name) {
  return NormLayer{ad::Var::parameter(ad::Tensor({features}, 1.0), name + ".gamma"),
                   ad::Var::parameter(ad::Tensor({features}, 0.0), name + ".beta"),
                   ad::BatchNormStats::init(features)};
}

}  // namespace

std::string_view to_string(Ablation a) {
  switch (a) {
    case Ablation::none: return "none";
    case Ablation::wkcnn: return "wkcnn";
    case Ablation::tcnn: return "tcnn";
    case Ablation::frn: return "frn";
    case Ablation::lda: return "lda";
  }
  return "none";
}

Ablation parse_ablation(std::string_view text) {
  for (auto a : {Ablation::none, Ablation::wkcnn, Ablation::tcnn, Ablation::frn, Ablation::lda}) {
    if (text == to_string(a)) return a;
  }
  throw_invalid(fmt::format("unknown ablation '{}' (expected none|wkcnn|tcnn|frn|lda)", text));
}

// ---- ModelConfig -----------------------------------------------------------

void ModelConfig::validate() const {
  if (n_channels < 4) throw_invalid(fmt::format("model: need at least 4 channels, got {}", n_channels));
  if (n_timepoints < 2) throw_invalid("model: need at least 2 time points");
  if (!(sample_rate_hz > 0.0)) throw_invalid("model: sample rate must be positive");
  if (n_wavelet_kernels != n_temporal_kernels) {
    throw_invalid(fmt::format("model: {} wavelet kernels cannot pair depthwise with {} temporal kernels",
                              n_wavelet_kernels, n_temporal_kernels));
  }
  if (n_temporal_kernels < 1) throw_invalid("model: need at least one kernel");
  if (wavelet_len < 1 || wavelet_len > n_timepoints || temporal_len < 1 || temporal_len > n_timepoints) {
    throw_invalid("model: kernel lengths must lie in [1, n_timepoints]");
  }
  if (dense_dims.size() < 2) throw_invalid("model: dense_dims needs an input and at least one layer");
  if (dense_dims.front() != n_temporal_kernels * csp::kFeaturesPerBranch) {
    throw_invalid(fmt::format("model: dense input must be {} (4 features per map), got {}",
                              n_temporal_kernels * csp::kFeaturesPerBranch, dense_dims.front()));
  }
  for (int d : dense_dims) {
    if (d < 1) throw_invalid("model: dense layer widths must be positive");
  }
  if (!(loss_ratio >= 0.0 && loss_ratio <= 1.0)) throw_invalid("model: loss_ratio must lie in [0, 1]");
  if (lr_wavelet < 0.0 || lr_main < 0.0 || l1 < 0.0 || l2 < 0.0) {
    throw_invalid("model: learning rates and regularization factors must be non-negative");
  }
  if (epochs < 0) throw_invalid("model: epochs must be non-negative");
  if (batch_size < 2) throw_invalid("model: batch_size must be at least 2");
}

int ModelConfig::classifier_dim() const {
  if (ablation == Ablation::frn) return n_temporal_kernels * csp::kFeaturesPerBranch;
  if (ablation == Ablation::lda) return 2;
  return dense_dims.back();
}

void ModelConfig::write(KvSection& s) const {
  const auto put = [&s](std::string key, std::string value) {
    s.entries.push_back(KvEntry{std::move(key), std::move(value), 0});
  };
  put("n_channels", fmt::format("{}", n_channels));
  put("n_timepoints", fmt::format("{}", n_timepoints));
  put("sample_rate_hz", fmt::format("{}", sample_rate_hz));
  put("n_wavelet_kernels", fmt::format("{}", n_wavelet_kernels));
  put("wavelet_len", fmt::format("{}", wavelet_len));
  put("n_temporal_kernels", fmt::format("{}", n_temporal_kernels));
  put("temporal_len", fmt::format("{}", temporal_len));
  put("dense_dims", fmt::format("{}", fmt::join(dense_dims, ",")));
  put("loss_ratio", fmt::format("{}", loss_ratio));
  put("lr_wavelet", fmt::format("{}", lr_wavelet));
  put("lr_main", fmt::format("{}", lr_main));
  put("l1", fmt::format("{}", l1));
  put("l2", fmt::format("{}", l2));
  put("epochs", fmt::format("{}", epochs));
  put("batch_size", fmt::format("{}", batch_size));
  put("seed", fmt::format("{}", seed));
  put("ablation", std::string(to_string(ablation)));
}

ModelConfig ModelConfig::read(const KvSection& s, std::string_view origin) {
  ModelConfig c;
  const auto get_int = [&](std::string_view key) {
    return static_cast<int>(parse_int(s.require(key, origin), key));
  };
  const auto get_double = [&](std::string_view key) { return parse_double(s.require(key, origin), key); };
  c.n_channels = get_int("n_channels");
  c.n_timepoints = get_int("n_timepoints");
  c.sample_rate_hz = get_double("sample_rate_hz");
  c.n_wavelet_kernels = get_int("n_wavelet_kernels");
  c.wavelet_len = get_int("wavelet_len");
  c.n_temporal_kernels = get_int("n_temporal_kernels");
  c.temporal_len = get_int("temporal_len");
  c.dense_dims.clear();
  for (const auto& part : split(s.require("dense_dims", origin), ',')) {
    c.dense_dims.push_back(static_cast<int>(parse_int(part, "dense_dims")));
  }
  c.loss_ratio = get_double("loss_ratio");
  c.lr_wavelet = get_double("lr_wavelet");
  c.lr_main = get_double("lr_main");
  c.l1 = get_double("l1");
  c.l2 = get_double("l2");
  c.epochs = get_int("epochs");
  c.batch_size = get_int("batch_size");
  {
    const auto& text = s.require("seed", origin);
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), c.seed);
    if (ec != std::errc{} || ptr != text.data() + text.size()) throw_data(fmt::format("{}: bad seed '{}'", origin, text));
  }
  c.ablation = parse_ablation(s.require("ablation", origin));
  c.validate();
  return c;
}

// ---- ParameterReport -------------------------------------------------------

std::size_t ParameterReport::count(std::string_view group) const {
  for (const auto& g : groups) {
    if (g.name == group) return g.count;
  }
  return 0;
}

std::string ParameterReport::to_text() const {
  std::string out;
  for (const auto& g : groups) {
    out += fmt::format("{:<22} {:>6}{}\n", g.name, g.count, g.trainable ? "" : "  (fitted, not trained)");
  }
  out += fmt::format("{:<22} {:>6}\n", "total", total);
  out += fmt::format("{:<22} {:>6}\n", "trainable", trainable);
  out += fmt::format(
      "note: the published total is {}; it is not itemized, and neither depthwise nor full temporal mixing "
      "reproduces it.\n",
      kPublishedTotal);
  return out;
}

// ---- Model -----------------------------------------------------------------

Model::Model(ModelConfig config) : config_(std::move(config)) {
  config_.validate();
  std::mt19937_64 rng(config_.seed);
  const auto k = static_cast<std::size_t>(config_.n_temporal_kernels);

  if (has_wavelet_stage()) {
    ad::Tensor w({k, 3});
    for (std::size_t i = 0; i < k; ++i) {
      const double frac = k == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(k - 1);
      w[i * 3] = dsp::kMinWaveletHz + frac * (dsp::kMaxWaveletHz - dsp::kMinWaveletHz);
      w[i * 3 + 1] = 0.25;
      w[i * 3 + 2] = 4.0 * std::numbers::ln2;
    }
    wavelet_ = ad::Var::parameter(std::move(w), "wavelet");
    spectral_bn_.push_back(make_norm(k, "spectral_bn0"));
  }
  if (has_temporal_stage()) {
    const auto len = static_cast<std::size_t>(config_.temporal_len);
    const double bound = 1.0 / std::sqrt(static_cast<double>(len));
    temporal_w_ = ad::Var::parameter(uniform_tensor({k, len}, bound, rng), "temporal.w");
    temporal_b_ = ad::Var::parameter(uniform_tensor({k}, bound, rng), "temporal.b");
    spectral_bn_.push_back(make_norm(k, fmt::format("spectral_bn{}", spectral_bn_.size())));
  }
  if (has_reduction_net()) {
    auto dims = config_.dense_dims;
    if (config_.ablation == Ablation::lda) dims.back() = 2;
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
      const auto din = static_cast<std::size_t>(dims[i]);
      const auto dout = static_cast<std::size_t>(dims[i + 1]);
      const double bound = 1.0 / std::sqrt(static_cast<double>(din));
      dense_.push_back(DenseLayer{ad::Var::parameter(uniform_tensor({din, dout}, bound, rng), fmt::format("dense{}.w", i)),
                                  ad::Var::parameter(uniform_tensor({dout}, bound, rng), fmt::format("dense{}.b", i))});
      if (i + 2 < dims.size()) dense_bn_.push_back(make_norm(dout, fmt::format("dense_bn{}", i)));
    }
  }
  register_optimizers();
}

void Model::register_optimizers() {
  opt_wavelet_ = ad::Adam(ad::AdamOptions{.lr = config_.lr_wavelet});
  opt_main_ = ad::Adam(ad::AdamOptions{.lr = config_.lr_main, .l1 = config_.l1, .l2 = config_.l2});
  if (wavelet_.defined()) opt_wavelet_.add_parameter(wavelet_, false);
  if (temporal_w_.defined()) {
    opt_main_.add_parameter(temporal_w_, true);
    opt_main_.add_parameter(temporal_b_, false);
  }
  for (auto& bn : spectral_bn_) {
    opt_main_.add_parameter(bn.gamma, false);
    opt_main_.add_parameter(bn.beta, false);
  }
  for (std::size_t i = 0; i < dense_.size(); ++i) {
    opt_main_.add_parameter(dense_[i].w, true);
    opt_main_.add_parameter(dense_[i].b, false);
    if (i < dense_bn_.size()) {
      opt_main_.add_parameter(dense_bn_[i].gamma, false);
      opt_main_.add_parameter(dense_bn_[i].beta, false);
    }
  }
}

void Model::set_learning_rates(double lr_wavelet, double lr_main) {
  config_.lr_wavelet = lr_wavelet;
  config_.lr_main = lr_main;
  auto wavelet_slots = opt_wavelet_.slots();
  auto main_slots = opt_main_.slots();
  const long wavelet_steps = opt_wavelet_.step_count();
  const long main_steps = opt_main_.step_count();
  register_optimizers();
  opt_wavelet_.mutable_slots() = std::move(wavelet_slots);
  opt_main_.mutable_slots() = std::move(main_slots);
  opt_wavelet_.restore(wavelet_steps);
  opt_main_.restore(main_steps);
}

const FrozenArtifacts& Model::frozen() const {
  if (!frozen_) throw_invalid("model is not finalized");
  return *frozen_;
}

void Model::set_frozen(FrozenArtifacts frozen) { frozen_ = std::move(frozen); }

ad::Var Model::to_input(std::span<const double> samples, std::size_t n) const {
  const auto c = static_cast<std::size_t>(config_.n_channels);
  const auto t = static_cast<std::size_t>(config_.n_timepoints);
  if (samples.size() != n * c * t) {
    throw_invalid(fmt::format("model: expected {} trials of {} x {} samples, got {} values", n, c, t, samples.size()));
  }
  return ad::Var::constant(ad::Tensor({n, 1, c, t}, std::vector<double>(samples.begin(), samples.end())));
}

ad::Var Model::forward_spectral(const ad::Var& input, ad::BnMode mode) {
  return spectral_upto(input, mode, spectral_bn_.size());
}

ad::Var Model::spectral_upto(const ad::Var& input, ad::BnMode mode, std::size_t norms) {
  const bool eval = mode == ad::BnMode::eval;
  const auto param = [eval](const ad::Var& v) { return eval ? ad::detach(v) : v; };
  ad::Var h = input;
  std::size_t bn = 0;
  const auto norm = [&]() {
    auto& layer = spectral_bn_[bn++];
    h = ad::batch_norm(h, param(layer.gamma), param(layer.beta), layer.stats, mode);
  };
  if (has_wavelet_stage()) {
    h = ad::conv_temporal(h, ad::morlet_bank(param(wavelet_), config_.wavelet_len, config_.sample_rate_hz));
    if (bn == norms) return h;
    norm();
  }
  if (has_temporal_stage()) {
    h = ad::conv_temporal(h, param(temporal_w_), param(temporal_b_));
    if (bn == norms) return h;
    norm();
  }
  return h;
}

ad::Var Model::reduce_upto(const ad::Var& features, ad::BnMode mode, std::size_t norms) {
  const bool eval = mode == ad::BnMode::eval;
  const auto param = [eval](const ad::Var& v) { return eval ? ad::detach(v) : v; };
  ad::Var h = features;
  for (std::size_t i = 0; i < dense_.size(); ++i) {
    h = ad::dense(h, param(dense_[i].w), param(dense_[i].b));
    if (i < dense_bn_.size()) {
      if (i == norms) return h;
      auto& layer = dense_bn_[i];
      h = ad::batch_norm(h, param(layer.gamma), param(layer.beta), layer.stats, mode);
    }
  }
  return h;
}

StepLosses Model::train_step(const Batch& batch, int epoch, int batch_index) {
  const std::size_t n = batch.n;
  if (batch.labels.size() != n) throw_invalid("train_step: label count mismatch");
  if (n < 2 || !both_classes(batch.labels)) throw_invalid("train_step: batch must contain both classes");

  opt_wavelet_.zero_grad();
  opt_main_.zero_grad();

  const ad::Var maps = forward_spectral(to_input(batch.samples, n), ad::BnMode::train);
  const std::size_t k = maps.value().dim(1);
  std::vector<Matrix> filters;
  filters.reserve(k);
  for (std::size_t b = 0; b < k; ++b) filters.push_back(csp::fit_branch(maps.value(), b, batch.labels).w_r);

  const ad::Var features = csp::spatial_filter_features(maps, filters);
  const ad::Var csp_loss = csp::csp_loss(features, batch.labels);
  ad::backward(csp_loss);

  StepLosses out;
  out.csp_loss = csp_loss.value().item();

  const ad::Var flat = ad::detach(ad::reshape(features, {n, k * csp::kFeaturesPerBranch}));
  ad::Var reduced = reduce(flat, ad::BnMode::train);
  ad::Var second;
  if (has_lda()) {
    const auto& rv = reduced.value();
    const Matrix xl = Eigen::Map<const RowMatrix>(rv.raw(), static_cast<Eigen::Index>(rv.dim(0)),
                                                  static_cast<Eigen::Index>(rv.dim(1)));
    const auto lda_model = lda::fit(xl, batch.labels);
    ad::Tensor w({static_cast<std::size_t>(lda_model.w.size()), 1});
    for (Eigen::Index i = 0; i < lda_model.w.size(); ++i) w[static_cast<std::size_t>(i)] = lda_model.w(i);
    second = ad::fisher_criterion(ad::dense(reduced, ad::Var::constant(std::move(w))), batch.labels);
  } else {
    second = ad::softmax_cross_entropy(reduced, batch.labels);
  }
  const double r = config_.loss_ratio;
  const ad::Var total =
      ad::add(ad::scale(ad::Var::constant(ad::Tensor::scalar(out.csp_loss)), r), ad::scale(second, 1.0 - r));
  ad::backward(total);
  out.fisher = second.value().item();
  out.combined = total.value().item();

  opt_wavelet_.step();
  opt_main_.step();
  if (wavelet_.defined()) {
    auto& w = wavelet_.mutable_value();
    for (std::size_t i = 0; i < w.dim(0); ++i) {
      dsp::MorletParams p{w[i * 3], w[i * 3 + 1], w[i * 3 + 2], config_.wavelet_len, config_.sample_rate_hz};
      dsp::clamp_morlet(p);
      w[i * 3] = p.f;
      w[i * 3 + 1] = p.h;
    }
  }
  history_.push_back(HistoryEntry{epoch, batch_index, out.csp_loss, out.fisher, out.combined});
  return out;
}

void Model::train(std::span<const double> samples, std::size_t n, std::span<const int> labels) {
  const std::size_t trial = static_cast<std::size_t>(config_.n_channels) * static_cast<std::size_t>(config_.n_timepoints);
  if (samples.size() != n * trial || labels.size() != n) throw_invalid("train: sample/label count mismatch");
  const auto bs = static_cast<std::size_t>(config_.batch_size);
  std::vector<std::size_t> order(n);
  std::vector<double> buf;
  std::vector<int> batch_labels;
  for (int epoch = 0; epoch < config_.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(config_.seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(epoch + 1)));
    std::shuffle(order.begin(), order.end(), rng);
    int batch_index = 0;
    for (std::size_t start = 0; start < n; start += bs) {
      const std::size_t m = std::min(bs, n - start);
      buf.resize(m * trial);
      batch_labels.resize(m);
      for (std::size_t i = 0; i < m; ++i) {
        const std::size_t src = order[start + i];
        std::copy_n(samples.data() + src * trial, trial, buf.data() + i * trial);
        batch_labels[i] = labels[src];
      }
      if (m >= 2 && both_classes(batch_labels)) {
        train_step(Batch{buf, m, batch_labels}, epoch, batch_index);
      }
      ++batch_index;
    }
  }
}

void Model::recalibrate_spectral(std::span<const double> samples, std::size_t n) {
  const std::size_t trial = static_cast<std::size_t>(config_.n_channels) * static_cast<std::size_t>(config_.n_timepoints);
  for (std::size_t layer = 0; layer < spectral_bn_.size(); ++layer) {
    MomentAccumulator acc;
    for (std::size_t start = 0; start < n; start += kEvalChunk) {
      const std::size_t m = std::min(kEvalChunk, n - start);
      acc.add(spectral_upto(to_input(samples.subspan(start * trial, m * trial), m), ad::BnMode::eval, layer).value());
    }
    acc.store(spectral_bn_[layer].stats);
  }
}

Matrix Model::reduced_from_features(const Matrix& features) {
  if (!has_reduction_net()) return features;
  const auto n = static_cast<std::size_t>(features.rows());
  ad::Tensor in({n, static_cast<std::size_t>(features.cols())});
  Eigen::Map<RowMatrix>(in.raw(), features.rows(), features.cols()) = features;
  const auto input = ad::Var::constant(std::move(in));
  const auto out = reduce(input, ad::BnMode::eval);
  const auto& ov = out.value();
  return Eigen::Map<const RowMatrix>(ov.raw(), static_cast<Eigen::Index>(ov.dim(0)), static_cast<Eigen::Index>(ov.dim(1)));
}

void Model::finalize(std::span<const double> samples, std::size_t n, std::span<const int> labels) {
  const auto c = static_cast<std::size_t>(config_.n_channels);
  const auto t = static_cast<std::size_t>(config_.n_timepoints);
  const std::size_t trial = c * t;
  if (samples.size() != n * trial || labels.size() != n) throw_invalid("finalize: sample/label count mismatch");
  if (!both_classes(labels)) throw_invalid("finalize: training set must contain both classes");

  recalibrate_spectral(samples, n);

  const auto k = static_cast<std::size_t>(config_.n_maps());
  std::vector<csp::CovarianceAccumulator> acc(k, csp::CovarianceAccumulator(c));
  std::vector<double> slice;
  for (std::size_t start = 0; start < n; start += kEvalChunk) {
    const std::size_t m = std::min(kEvalChunk, n - start);
    const auto maps = forward_spectral(to_input(samples.subspan(start * trial, m * trial), m), ad::BnMode::eval);
    const auto& mv = maps.value();
    slice.resize(m * trial);
    for (std::size_t b = 0; b < k; ++b) {
      for (std::size_t i = 0; i < m; ++i) {
        const double* src = mv.raw() + (i * k + b) * trial;
        std::copy_n(src, trial, slice.data() + i * trial);
      }
      acc[b].add(slice, m, t, labels.subspan(start, m));
    }
  }
  FrozenArtifacts frozen;
  for (auto& a : acc) {
    const auto cov = a.result();
    frozen.filters.push_back(csp::reduce_projection(csp::solve_csp(cov.sigma1, cov.sigma0, cov.ridge).w));
  }
  frozen_ = std::move(frozen);

  const Matrix features = csp_features(samples, n);
  if (has_reduction_net()) {
    ad::Tensor in({n, static_cast<std::size_t>(features.cols())});
    Eigen::Map<RowMatrix>(in.raw(), features.rows(), features.cols()) = features;
    const auto input = ad::Var::constant(std::move(in));
    for (std::size_t layer = 0; layer < dense_bn_.size(); ++layer) {
      MomentAccumulator moments;
      moments.add(reduce_upto(input, ad::BnMode::eval, layer).value());
      moments.store(dense_bn_[layer].stats);
    }
  }
  if (has_lda()) frozen_->lda = lda::fit(reduced_from_features(features), labels);
}

Matrix Model::csp_features(std::span<const double> samples, std::size_t n) const {
  const auto& fz = frozen();
  auto& self = const_cast<Model&>(*this);  // eval mode leaves running stats untouched
  const std::size_t trial = static_cast<std::size_t>(config_.n_channels) * static_cast<std::size_t>(config_.n_timepoints);
  if (samples.size() != n * trial) throw_invalid("csp_features: sample count mismatch");
  const auto width = static_cast<Eigen::Index>(config_.n_maps() * csp::kFeaturesPerBranch);
  Matrix out(static_cast<Eigen::Index>(n), width);
  for (std::size_t start = 0; start < n; start += kEvalChunk) {
    const std::size_t m = std::min(kEvalChunk, n - start);
    const auto maps = self.forward_spectral(to_input(samples.subspan(start * trial, m * trial), m), ad::BnMode::eval);
    const auto feats = csp::spatial_filter_features(maps, fz.filters);
    const auto& fv = feats.value();
    for (std::size_t i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < width; ++j)
        out(static_cast<Eigen::Index>(start + i), j) = fv[i * static_cast<std::size_t>(width) + static_cast<std::size_t>(j)];
  }
  return out;
}

Matrix Model::eval_reduced(std::span<const double> samples, std::size_t n) const {
  // eval mode leaves every running statistic untouched
  return const_cast<Model&>(*this).reduced_from_features(csp_features(samples, n));
}

std::vector<int> Model::predict(std::span<const double> samples, std::size_t n) const {
  const auto& fz = frozen();
  const Matrix reduced = eval_reduced(samples, n);
  if (has_lda()) return lda::predict(fz.lda, reduced);
  std::vector<int> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = reduced(static_cast<Eigen::Index>(i), 1) > reduced(static_cast<Eigen::Index>(i), 0) ? 1 : 0;
  return out;
}

ad::Tensor Model::spectral_maps(std::span<const double> trial) const {
  auto& self = const_cast<Model&>(*this);
  const auto maps = self.forward_spectral(to_input(trial, 1), ad::BnMode::eval);
  const auto& mv = maps.value();
  return mv.reshaped({mv.dim(1), mv.dim(2), mv.dim(3)});
}

ParameterReport Model::count_parameters() const {
  ParameterReport r;
  const auto add = [&r](std::string name, std::size_t count, bool trainable) {
    if (count == 0) return;
    r.groups.push_back(ParameterGroup{std::move(name), count, trainable});
    r.total += count;
    if (trainable) r.trainable += count;
  };
  add("wavelet", wavelet_.defined() ? wavelet_.value().size() : 0, true);
  add("temporal kernels", temporal_w_.defined() ? temporal_w_.value().size() + temporal_b_.value().size() : 0, true);
  std::size_t bn2d = 0;
  for (const auto& bn : spectral_bn_) bn2d += bn.gamma.value().size() + bn.beta.value().size();
  add("batch-norm 2d", bn2d, true);
  std::size_t dense = 0;
  for (const auto& d : dense_) dense += d.w.value().size() + d.b.value().size();
  add("dense", dense, true);
  std::size_t bn1d = 0;
  for (const auto& bn : dense_bn_) bn1d += bn.gamma.value().size() + bn.beta.value().size();
  add("batch-norm 1d", bn1d, true);
  add("csp (frozen)",
      static_cast<std::size_t>(config_.n_maps()) * static_cast<std::size_t>(config_.n_channels) * csp::kFeaturesPerBranch,
      false);
  if (has_lda()) add("lda (frozen)", static_cast<std::size_t>(config_.classifier_dim()) + 2, false);
  return r;
}

}  // namespace ccsp
