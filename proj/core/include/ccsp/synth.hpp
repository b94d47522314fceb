#pragma once

#include <cstdint>

#include "ccsp/linalg.hpp"
#include "ccsp/trial_set.hpp"

namespace ccsp::data {

// Generative ERD/ERS model. Every source carries unit-variance 1/f noise;
// sources 0 (L) and 1 (R) also carry a 10 Hz mu and a 20 Hz beta rhythm.
// Class 0 scales the mu power of L by `erd` and the beta power of R by
// 1 / erd; class 1 is mirrored. Channels are A * sources plus white noise at
// `snr` (signal power / noise power).
struct SynthConfig {
  int n_subjects = 4;
  int trials_per_class = 100;  // per subject, must be even
  int n_channels = 16;
  double snr = 4.0;
  double erd = 0.5;
  double subject_variability = 0.1;
  std::uint64_t seed = 1;
  double sample_rate_hz = 1000.0;
  int n_samples = 4000;
  double mu_amplitude = 2.0;
  double beta_amplitude = 1.0;

  void validate() const;
};

// Effective per-subject parameters after the variability draw.
struct SubjectModel {
  RowMatrix mixing;  // C x C
  double erd = 0.5;
};

SubjectModel subject_model(const SynthConfig& config, int subject);

// Subjects are numbered 1..n_subjects. Each subject gets four equal
// (session, phase) blocks in the order S1-offline, S1-online, S2-offline,
// S2-online, with alternating labels.
TrialSet synthesize(const SynthConfig& config);
TrialSet synthesize_subject(const SynthConfig& config, int subject);

// Source-level signals of one trial (C x n_samples), before mixing. Used to
// check the planted band-power ratio.
RowMatrix synthesize_sources(const SynthConfig& config, int subject, int trial_index, int label);

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace ccsp::data
