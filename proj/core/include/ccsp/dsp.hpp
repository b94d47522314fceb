#pragma once

#include <complex>
#include <span>
#include <utility>
#include <vector>

#include "ccsp/linalg.hpp"

namespace ccsp::dsp {

// One second-order section, a0 normalized to 1:
//   y[n] = b0 x[n] + b1 x[n-1] + b2 x[n-2] - a1 y[n-1] - a2 y[n-2]
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

struct BiquadCascade {
  std::vector<Biquad> sections;
  double low_hz = 0.0;   // 0 for a low-pass design
  double high_hz = 0.0;
  int order = 0;
  double sample_rate_hz = 0.0;

  std::complex<double> response(double hz) const;
  double magnitude(double hz) const { return std::abs(response(hz)); }
  // Largest pole radius over all sections.
  double max_pole_radius() const;
};

// Butterworth band-pass of the given prototype order (2*order poles), built
// from the analog prototype with pre-warped edges and the bilinear map.
BiquadCascade design_bandpass(double low_hz, double high_hz, int order, double fs);
BiquadCascade design_lowpass(double cutoff_hz, int order, double fs);

// Causal direct-form-II-transposed filtering.
std::vector<double> filter_forward(const BiquadCascade& cascade, std::span<const double> signal);
void filter_rows(const BiquadCascade& cascade, RowMatrix& rows);

struct TimeWindowMs {
  double start = 0.0;
  double end = 0.0;
};

inline constexpr int kAntiAliasOrder = 20;

// Extract [start, end) ms from a C x T trial sampled at source_hz and decimate
// to target_hz. The anti-alias low-pass (cutoff 0.4 * target_hz) runs over the
// whole trial before the window is cut, so the filter transient stays outside.
RowMatrix trim_and_downsample(const RowMatrix& trial, TimeWindowMs window, double target_hz,
                              double source_hz = 1000.0);

struct MorletParams {
  double f = 10.0;  // centre frequency, Hz
  double h = 0.25;  // Gaussian full width at half maximum, s
  double c = 4.0 * 0.6931471805599453;
  int kernel_len = 32;
  double fs = 100.0;
};

inline constexpr double kMinWaveletHz = 8.0;
inline constexpr double kMaxWaveletHz = 30.0;
inline constexpr double kMinWaveletWidth = 1e-3;

// Sample times n / fs for n = -floor(k/2) .. ceil(k/2) - 1.
std::vector<double> morlet_time(int kernel_len, double fs);
std::vector<double> build_morlet(const MorletParams& params);

struct MorletGradient {
  double df = 0.0;
  double dh = 0.0;
  double dc = 0.0;
};
MorletGradient morlet_gradients(const MorletParams& params, std::span<const double> upstream);

// Keeps trained wavelet parameters inside their admissible region.
void clamp_morlet(MorletParams& params);

struct Spectrogram {
  RowMatrix magnitude;  // rows: frequency bins 0..window/2, cols: frames
  double bin_hz = 0.0;
  double hop_s = 0.0;
};

// Hann-windowed short-time Fourier magnitude.
Spectrogram stft(std::span<const double> signal, int window_len, int hop, double fs);

}  // namespace ccsp::dsp
