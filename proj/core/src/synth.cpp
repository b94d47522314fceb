#include "ccsp/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/QR>
#include <fmt/format.h>

#include "ccsp/error.hpp"

namespace ccsp::data {

namespace {

constexpr int kPinkBurnIn = 2000;

// Paul Kellet's refined pink-noise filter on white Gaussian input, scaled to
// unit sample variance.
void pink_noise(std::mt19937_64& rng, double* out, int n) {
  std::normal_distribution<double> white(0.0, 1.0);
  double b[7] = {0, 0, 0, 0, 0, 0, 0};
  double sum = 0.0, sum2 = 0.0;
  for (int i = -kPinkBurnIn; i < n; ++i) {
    const double w = white(rng);
    b[0] = 0.99886 * b[0] + w * 0.0555179;
    b[1] = 0.99332 * b[1] + w * 0.0750759;
    b[2] = 0.96900 * b[2] + w * 0.1538520;
    b[3] = 0.86650 * b[3] + w * 0.3104856;
    b[4] = 0.55000 * b[4] + w * 0.5329522;
    b[5] = -0.7616 * b[5] - w * 0.0168980;
    const double y = b[0] + b[1] + b[2] + b[3] + b[4] + b[5] + b[6] + w * 0.5362;
    b[6] = w * 0.115926;
    if (i >= 0) {
      out[i] = y;
      sum += y;
      sum2 += y * y;
    }
  }
  const double mean = sum / n;
  const double sd = std::sqrt(std::max(sum2 / n - mean * mean, 1e-300));
  for (int i = 0; i < n; ++i) out[i] = (out[i] - mean) / sd;
}

void add_rhythm(std::mt19937_64& rng, double* out, int n, double fs, double centre_hz, double jitter_hz,
                double amplitude) {
  std::uniform_real_distribution<double> freq(centre_hz - jitter_hz, centre_hz + jitter_hz);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> gain(0.9, 1.1);
  const double f = freq(rng);
  const double phi = phase(rng);
  const double a = amplitude * gain(rng);
  for (int i = 0; i < n; ++i) out[i] += a * std::sin(2.0 * std::numbers::pi * f * i / fs + phi);
}

int block_size(const SynthConfig& c) { return c.trials_per_class / 2; }

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined state
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void SynthConfig::validate() const {
  if (n_subjects < 1) throw_invalid("synth: need at least one subject");
  if (n_channels < 4) throw_invalid(fmt::format("synth: need at least 4 channels, got {}", n_channels));
  if (trials_per_class < 2 || trials_per_class % 2 != 0) {
    throw_invalid(fmt::format("synth: trials_per_class must be even and >= 2, got {}", trials_per_class));
  }
  if (!(snr > 0.0) || !std::isfinite(snr)) throw_invalid(fmt::format("synth: snr must be positive, got {}", snr));
  if (!(erd > 0.0)) throw_invalid(fmt::format("synth: erd factor must be positive, got {}", erd));
  if (subject_variability < 0.0) throw_invalid("synth: subject_variability must be non-negative");
  if (!(sample_rate_hz > 0.0) || n_samples < 2) throw_invalid("synth: bad sample rate or length");
  if (n_subjects > 65535) throw_invalid("synth: subject ids must fit in 16 bits");
}

SubjectModel subject_model(const SynthConfig& config, int subject) {
  config.validate();
  const int c = config.n_channels;
  std::mt19937_64 base_rng(mix_seed(config.seed, 0));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> scale(0.5, 1.5);

  Matrix g(c, c);
  for (int i = 0; i < c; ++i)
    for (int j = 0; j < c; ++j) g(i, j) = normal(base_rng);
  const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ();
  Vector d(c);
  for (int i = 0; i < c; ++i) d(i) = scale(base_rng);
  Matrix a = q * d.asDiagonal();

  std::mt19937_64 rng(mix_seed(config.seed, static_cast<std::uint64_t>(subject)));
  const double v = config.subject_variability;
  const double inv_sqrt_c = 1.0 / std::sqrt(static_cast<double>(c));
  for (int i = 0; i < c; ++i)
    for (int j = 0; j < c; ++j) a(i, j) += v * inv_sqrt_c * normal(rng);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return SubjectModel{a, std::pow(config.erd, 1.0 + v * u(rng))};
}

RowMatrix synthesize_sources(const SynthConfig& config, int subject, int trial_index, int label) {
  config.validate();
  if (label != 0 && label != 1) throw_invalid("synth: label must be 0 or 1");
  const auto model = subject_model(config, subject);
  const int c = config.n_channels;
  const int n = config.n_samples;
  std::mt19937_64 rng(mix_seed(mix_seed(config.seed, static_cast<std::uint64_t>(subject)),
                               static_cast<std::uint64_t>(trial_index) + 1));
  RowMatrix s(c, n);
  for (int k = 0; k < c; ++k) pink_noise(rng, s.row(k).data(), n);

  // Power factors for (mu, beta) on sources L = 0 and R = 1.
  const double atten = model.erd;
  const double boost = 1.0 / model.erd;
  const double mu_l = label == 0 ? atten : 1.0;
  const double mu_r = label == 1 ? atten : 1.0;
  const double beta_l = label == 1 ? boost : 1.0;
  const double beta_r = label == 0 ? boost : 1.0;
  const double fs = config.sample_rate_hz;
  add_rhythm(rng, s.row(0).data(), n, fs, 10.0, 0.5, config.mu_amplitude * std::sqrt(mu_l));
  add_rhythm(rng, s.row(0).data(), n, fs, 20.0, 1.0, config.beta_amplitude * std::sqrt(beta_l));
  add_rhythm(rng, s.row(1).data(), n, fs, 10.0, 0.5, config.mu_amplitude * std::sqrt(mu_r));
  add_rhythm(rng, s.row(1).data(), n, fs, 20.0, 1.0, config.beta_amplitude * std::sqrt(beta_r));
  return s;
}

TrialSet synthesize_subject(const SynthConfig& config, int subject) {
  config.validate();
  const auto model = subject_model(config, subject);
  const int c = config.n_channels;
  const int n = config.n_samples;
  const int total = 2 * config.trials_per_class;
  TrialSet out(static_cast<std::size_t>(c), static_cast<std::size_t>(n), config.sample_rate_hz);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<float> buf(static_cast<std::size_t>(c) * static_cast<std::size_t>(n));
  for (int i = 0; i < total; ++i) {
    const int label = i % 2;
    const RowMatrix s = synthesize_sources(config, subject, i, label);
    RowMatrix x = model.mixing * s;
    const double power = x.squaredNorm() / static_cast<double>(x.size());
    const double noise_sd = std::sqrt(power / config.snr);
    std::mt19937_64 rng(mix_seed(mix_seed(config.seed, static_cast<std::uint64_t>(subject)),
                                 0x5eed0000ULL + static_cast<std::uint64_t>(i)));
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      buf[static_cast<std::size_t>(k)] = static_cast<float>(x.data()[k] + noise_sd * normal(rng));
    }
    const int block = i / block_size(config);
    out.push_back(std::span<const float>(buf), label, subject, block / 2 + 1, static_cast<Phase>(block % 2));
  }
  return out;
}

TrialSet synthesize(const SynthConfig& config) {
  config.validate();
  TrialSet out;
  for (int s = 1; s <= config.n_subjects; ++s) out.append(synthesize_subject(config, s));
  return out;
}

}  // namespace ccsp::data
