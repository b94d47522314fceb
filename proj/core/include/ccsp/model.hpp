#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ccsp/adam.hpp"
#include "ccsp/csp.hpp"
#include "ccsp/error.hpp"
#include "ccsp/graph.hpp"
#include "ccsp/kv_text.hpp"
#include "ccsp/lda.hpp"
#include "ccsp/ops.hpp"

namespace ccsp {

// Component removed for an ablation run.
enum class Ablation { none, wkcnn, tcnn, frn, lda };

std::string_view to_string(Ablation a);
Ablation parse_ablation(std::string_view text);

// Defaults follow the published hyperparameter table (SD column for epochs and
// batch size).
struct ModelConfig {
  int n_channels = 62;
  int n_timepoints = 250;
  double sample_rate_hz = 100.0;
  int n_wavelet_kernels = 4;
  int wavelet_len = 32;
  int n_temporal_kernels = 4;
  int temporal_len = 64;
  std::vector<int> dense_dims{16, 16, 8, 4};
  double loss_ratio = 0.3;
  double lr_wavelet = 0.001;
  double lr_main = 0.01;
  double l1 = 0.01;
  double l2 = 0.1;
  int epochs = 20;
  int batch_size = 300;
  std::uint64_t seed = 1;
  Ablation ablation = Ablation::none;

  void validate() const;
  int n_maps() const { return n_temporal_kernels; }
  // Width of the feature vector handed to the classifier.
  int classifier_dim() const;

  void write(KvSection& section) const;
  static ModelConfig read(const KvSection& section, std::string_view origin);

  bool operator==(const ModelConfig&) const = default;
};

struct HistoryEntry {
  int epoch = 0;
  int batch = 0;
  double csp_loss = 0.0;
  double fisher = 0.0;
  double combined = 0.0;
};

struct StepLosses {
  double csp_loss = 0.0;
  double fisher = 0.0;  // cross-entropy of the softmax head for the lda ablation
  double combined = 0.0;
};

struct ParameterGroup {
  std::string name;
  std::size_t count = 0;
  bool trainable = true;
};

struct ParameterReport {
  std::vector<ParameterGroup> groups;
  std::size_t total = 0;
  std::size_t trainable = 0;
  static constexpr std::size_t kPublishedTotal = 5036;

  std::size_t count(std::string_view group) const;
  std::string to_text() const;
};

struct DenseLayer {
  ad::Var w;
  ad::Var b;
};

struct NormLayer {
  ad::Var gamma;
  ad::Var beta;
  ad::BatchNormStats stats;
};

// Inference-time artifacts fitted on the full training set.
struct FrozenArtifacts {
  std::vector<Matrix> filters;  // one C x 4 reduced projection per map
  lda::LdaModel lda;
};

// Trials handed to the model: row-major N x C x T, f64.
struct Batch {
  std::span<const double> samples;
  std::size_t n = 0;
  std::span<const int> labels;
};

class Model {
 public:
  explicit Model(ModelConfig config);
  Model(Model&&) = default;
  Model& operator=(Model&&) = default;
  // Parameters live in shared graph nodes, so copies would alias.
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  const ModelConfig& config() const noexcept { return config_; }
  bool finalized() const noexcept { return frozen_.has_value(); }
  const FrozenArtifacts& frozen() const;
  const std::vector<HistoryEntry>& history() const noexcept { return history_; }

  // Wavelet -> batch norm -> temporal conv -> batch norm, N x 1 x C x T in,
  // N x K x C x T out (stages are skipped under the matching ablation).
  ad::Var forward_spectral(const ad::Var& input, ad::BnMode mode);

  // One optimization step on a batch holding both classes.
  StepLosses train_step(const Batch& batch, int epoch = 0, int batch_index = 0);

  // Epoch loop with seeded shuffling; batches that miss a class are skipped.
  void train(std::span<const double> samples, std::size_t n, std::span<const int> labels);

  // Resets every batch-norm layer's running statistics to the exact
  // training-set statistics under the final weights, then refits the CSP
  // filters and the classifier on eval-mode outputs of the whole set.
  void finalize(std::span<const double> samples, std::size_t n, std::span<const int> labels);

  std::vector<int> predict(std::span<const double> samples, std::size_t n) const;

  // Eval-mode CSP features (N x K*4, branch-major) of a finalized model.
  Matrix csp_features(std::span<const double> samples, std::size_t n) const;
  // Eval-mode spectral stage output for one trial, K x C x T.
  ad::Tensor spectral_maps(std::span<const double> trial) const;

  ParameterReport count_parameters() const;

  // Parameter access, also used by serialization and tests.
  ad::Var& wavelet_params() { return wavelet_; }
  ad::Var& temporal_kernels() { return temporal_w_; }
  ad::Var& temporal_bias() { return temporal_b_; }
  std::vector<NormLayer>& spectral_norms() { return spectral_bn_; }
  std::vector<DenseLayer>& dense_layers() { return dense_; }
  std::vector<NormLayer>& dense_norms() { return dense_bn_; }
  ad::Adam& wavelet_optimizer() { return opt_wavelet_; }
  ad::Adam& main_optimizer() { return opt_main_; }
  std::vector<HistoryEntry>& mutable_history() { return history_; }
  void set_frozen(FrozenArtifacts frozen);
  void set_learning_rates(double lr_wavelet, double lr_main);

  bool has_wavelet_stage() const { return config_.ablation != Ablation::wkcnn; }
  bool has_temporal_stage() const { return config_.ablation != Ablation::tcnn; }
  bool has_reduction_net() const { return config_.ablation != Ablation::frn; }
  bool has_lda() const { return config_.ablation != Ablation::lda; }

 private:
  ad::Var to_input(std::span<const double> samples, std::size_t n) const;
  // Runs the first stages; when `norms` is below the layer count the result
  // is the input of norm layer `norms`.
  ad::Var spectral_upto(const ad::Var& input, ad::BnMode mode, std::size_t norms);
  ad::Var reduce_upto(const ad::Var& features, ad::BnMode mode, std::size_t norms);
  ad::Var reduce(const ad::Var& features, ad::BnMode mode) { return reduce_upto(features, mode, dense_bn_.size()); }
  void recalibrate_spectral(std::span<const double> samples, std::size_t n);
  Matrix reduced_from_features(const Matrix& features);
  Matrix eval_reduced(std::span<const double> samples, std::size_t n) const;
  void register_optimizers();

  ModelConfig config_;
  ad::Var wavelet_;     // K x 3 rows of (f, h, c)
  ad::Var temporal_w_;  // K x temporal_len
  ad::Var temporal_b_;  // K
  std::vector<NormLayer> spectral_bn_;
  std::vector<DenseLayer> dense_;
  std::vector<NormLayer> dense_bn_;
  ad::Adam opt_wavelet_;
  ad::Adam opt_main_;
  std::vector<HistoryEntry> history_;
  std::optional<FrozenArtifacts> frozen_;
};

// ---- container format --------------------------------------------------

enum class ModelFormatErrorKind { bad_magic, bad_version, shape_mismatch };

class ModelFormatError : public Error {
 public:
  ModelFormatError(ModelFormatErrorKind kind, const std::string& what) : Error(ErrorKind::data, what), kind_(kind) {}
  ModelFormatErrorKind format_kind() const noexcept { return kind_; }

 private:
  ModelFormatErrorKind kind_;
};

inline constexpr std::uint32_t kModelFormatVersion = 1;

std::vector<std::uint8_t> serialize_model(Model& model);
Model deserialize_model(std::span<const std::uint8_t> bytes);
void save_model(Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace ccsp
