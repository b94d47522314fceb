#include "ccsp/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "ccsp/error.hpp"

namespace ccsp::dsp {

namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

enum class Band { lowpass, bandpass };

std::vector<cplx> butterworth_prototype(int order) {
  std::vector<cplx> poles;
  poles.reserve(order);
  for (int k = 1; k <= order; ++k) {
    const double theta = kPi * (2.0 * k + order - 1) / (2.0 * order);
    poles.push_back(std::polar(1.0, theta));
  }
  return poles;
}

cplx bilinear(cplx s, double fs) { return (2.0 * fs + s) / (2.0 * fs - s); }

double prewarp(double hz, double fs) { return 2.0 * fs * std::tan(kPi * hz / fs); }

// Groups digital poles into conjugate pairs (or real pairs) and emits
// sections with unit numerators shaped by the band type.
std::vector<Biquad> assemble_sections(std::vector<cplx> poles, Band band) {
  constexpr double kImagTol = 1e-12;
  std::vector<cplx> complex_upper;
  std::vector<double> real;
  for (const auto& p : poles) {
    if (p.imag() > kImagTol) {
      complex_upper.push_back(p);
    } else if (std::abs(p.imag()) <= kImagTol) {
      real.push_back(p.real());
    }
  }
  std::sort(complex_upper.begin(), complex_upper.end(),
            [](cplx a, cplx b) { return std::abs(a) < std::abs(b); });
  std::sort(real.begin(), real.end());

  std::vector<Biquad> out;
  const auto numerator = [band](Biquad& s, bool first_order) {
    if (band == Band::bandpass) {
      s.b0 = 1.0, s.b1 = 0.0, s.b2 = -1.0;
    } else if (first_order) {
      s.b0 = 1.0, s.b1 = 1.0, s.b2 = 0.0;
    } else {
      s.b0 = 1.0, s.b1 = 2.0, s.b2 = 1.0;
    }
  };
  for (std::size_t i = 0; i + 1 < real.size(); i += 2) {
    Biquad s;
    numerator(s, false);
    s.a1 = -(real[i] + real[i + 1]);
    s.a2 = real[i] * real[i + 1];
    out.push_back(s);
  }
  if (real.size() % 2 == 1) {
    // Only reachable for odd low-pass orders.
    Biquad s;
    numerator(s, true);
    s.a1 = -real.back();
    s.a2 = 0.0;
    out.push_back(s);
  }
  for (const auto& p : complex_upper) {
    Biquad s;
    numerator(s, false);
    s.a1 = -2.0 * p.real();
    s.a2 = std::norm(p);
    out.push_back(s);
  }
  return out;
}

cplx section_response(const Biquad& s, cplx zinv) {
  const cplx num = s.b0 + zinv * (s.b1 + zinv * s.b2);
  const cplx den = 1.0 + zinv * (s.a1 + zinv * s.a2);
  return num / den;
}

void normalize_gain(BiquadCascade& cascade, double at_hz) {
  const double g = 1.0 / cascade.magnitude(at_hz);
  const double per_section = std::pow(g, 1.0 / static_cast<double>(cascade.sections.size()));
  for (auto& s : cascade.sections) {
    s.b0 *= per_section;
    s.b1 *= per_section;
    s.b2 *= per_section;
  }
}

}  // namespace

std::complex<double> BiquadCascade::response(double hz) const {
  const cplx zinv = std::polar(1.0, -2.0 * kPi * hz / sample_rate_hz);
  cplx h = 1.0;
  for (const auto& s : sections) h *= section_response(s, zinv);
  return h;
}

double BiquadCascade::max_pole_radius() const {
  double r = 0.0;
  for (const auto& s : sections) {
    // Roots of z^2 + a1 z + a2.
    const cplx disc = std::sqrt(cplx(s.a1 * s.a1 - 4.0 * s.a2, 0.0));
    r = std::max({r, std::abs((-s.a1 + disc) / 2.0), std::abs((-s.a1 - disc) / 2.0)});
  }
  return r;
}

BiquadCascade design_bandpass(double low_hz, double high_hz, int order, double fs) {
  if (order < 1) throw_invalid(fmt::format("design_bandpass: order must be >= 1, got {}", order));
  if (!(fs > 0.0) || !(low_hz > 0.0) || !(low_hz < high_hz) || !(high_hz < fs / 2.0)) {
    throw_invalid(fmt::format(
        "design_bandpass: invalid design, need 0 < low < high < fs/2 (low={}, high={}, fs={})",
        low_hz, high_hz, fs));
  }
  const double w_low = prewarp(low_hz, fs);
  const double w_high = prewarp(high_hz, fs);
  const double bw = w_high - w_low;
  const double w0_sq = w_low * w_high;

  std::vector<cplx> digital;
  digital.reserve(2 * order);
  for (const auto& p : butterworth_prototype(order)) {
    const cplx half = p * bw / 2.0;
    const cplx root = std::sqrt(half * half - w0_sq);
    digital.push_back(bilinear(half + root, fs));
    digital.push_back(bilinear(half - root, fs));
  }

  BiquadCascade cascade;
  cascade.sections = assemble_sections(std::move(digital), Band::bandpass);
  cascade.low_hz = low_hz;
  cascade.high_hz = high_hz;
  cascade.order = order;
  cascade.sample_rate_hz = fs;
  // Digital image of the analog centre frequency sqrt(w_low * w_high).
  const double centre_hz = fs / kPi * std::atan(std::sqrt(w0_sq) / (2.0 * fs));
  normalize_gain(cascade, centre_hz);
  return cascade;
}

BiquadCascade design_lowpass(double cutoff_hz, int order, double fs) {
  if (order < 1) throw_invalid(fmt::format("design_lowpass: order must be >= 1, got {}", order));
  if (!(fs > 0.0) || !(cutoff_hz > 0.0) || !(cutoff_hz < fs / 2.0)) {
    throw_invalid(fmt::format("design_lowpass: invalid design, need 0 < cutoff < fs/2 (cutoff={}, fs={})",
                              cutoff_hz, fs));
  }
  const double wc = prewarp(cutoff_hz, fs);
  std::vector<cplx> digital;
  digital.reserve(order);
  for (const auto& p : butterworth_prototype(order)) digital.push_back(bilinear(p * wc, fs));

  BiquadCascade cascade;
  cascade.sections = assemble_sections(std::move(digital), Band::lowpass);
  cascade.low_hz = 0.0;
  cascade.high_hz = cutoff_hz;
  cascade.order = order;
  cascade.sample_rate_hz = fs;
  normalize_gain(cascade, 0.0);
  return cascade;
}

namespace {

void run_cascade(const BiquadCascade& cascade, double* data, std::size_t n) {
  for (const auto& s : cascade.sections) {
    double z1 = 0.0, z2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = data[i];
      const double y = s.b0 * x + z1;
      z1 = s.b1 * x - s.a1 * y + z2;
      z2 = s.b2 * x - s.a2 * y;
      data[i] = y;
    }
  }
}

void check_finite(const double* data, std::size_t n, std::size_t row) {
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(data[i])) {
      throw_numerical(fmt::format("filter_forward: non-finite sample at row {}, index {}", row, i));
    }
  }
}

}  // namespace

std::vector<double> filter_forward(const BiquadCascade& cascade, std::span<const double> signal) {
  if (signal.empty()) throw_invalid("filter_forward: empty signal");
  check_finite(signal.data(), signal.size(), 0);
  std::vector<double> out(signal.begin(), signal.end());
  run_cascade(cascade, out.data(), out.size());
  return out;
}

void filter_rows(const BiquadCascade& cascade, RowMatrix& rows) {
  if (rows.cols() == 0) throw_invalid("filter_rows: empty signal");
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    double* row = rows.row(r).data();
    check_finite(row, static_cast<std::size_t>(rows.cols()), static_cast<std::size_t>(r));
    run_cascade(cascade, row, static_cast<std::size_t>(rows.cols()));
  }
}

RowMatrix trim_and_downsample(const RowMatrix& trial, TimeWindowMs window, double target_hz,
                              double source_hz) {
  const double samples_per_ms = source_hz / 1000.0;
  const auto start = static_cast<Eigen::Index>(std::llround(window.start * samples_per_ms));
  const auto end = static_cast<Eigen::Index>(std::llround(window.end * samples_per_ms));
  if (start < 0 || end <= start || end > trial.cols()) {
    throw_invalid(fmt::format("trim_and_downsample: window [{}, {}) ms exceeds trial of {} samples at {} Hz",
                              window.start, window.end, trial.cols(), source_hz));
  }
  const double ratio = source_hz / target_hz;
  const auto factor = static_cast<Eigen::Index>(std::llround(ratio));
  if (factor < 1 || std::abs(ratio - static_cast<double>(factor)) > 1e-9) {
    throw_invalid(fmt::format("trim_and_downsample: {} Hz is not an integer divisor of {} Hz", target_hz,
                              source_hz));
  }
  if (factor == 1) return trial.middleCols(start, end - start);

  RowMatrix filtered = trial;
  filter_rows(design_lowpass(0.4 * target_hz, kAntiAliasOrder, source_hz), filtered);

  const Eigen::Index out_len = (end - start) / factor;
  RowMatrix out(trial.rows(), out_len);
  for (Eigen::Index r = 0; r < trial.rows(); ++r) {
    for (Eigen::Index i = 0; i < out_len; ++i) out(r, i) = filtered(r, start + i * factor);
  }
  return out;
}

std::vector<double> morlet_time(int kernel_len, double fs) {
  std::vector<double> t(static_cast<std::size_t>(kernel_len));
  const int first = -(kernel_len / 2);
  for (int i = 0; i < kernel_len; ++i) t[static_cast<std::size_t>(i)] = (first + i) / fs;
  return t;
}

namespace {

void check_morlet(const MorletParams& p) {
  if (p.kernel_len < 1) throw_invalid(fmt::format("build_morlet: kernel_len must be >= 1, got {}", p.kernel_len));
  if (!(p.fs > 0.0)) throw_invalid("build_morlet: fs must be positive");
  if (!(p.h > 0.0)) throw_invalid(fmt::format("build_morlet: width h must be positive, got {}", p.h));
  if (!std::isfinite(p.f) || !std::isfinite(p.c)) throw_numerical("build_morlet: non-finite parameter");
}

}  // namespace

std::vector<double> build_morlet(const MorletParams& params) {
  check_morlet(params);
  auto w = morlet_time(params.kernel_len, params.fs);
  const double inv_h2 = 1.0 / (params.h * params.h);
  for (auto& t : w) t = std::cos(2.0 * kPi * params.f * t) * std::exp(-params.c * t * t * inv_h2);
  return w;
}

MorletGradient morlet_gradients(const MorletParams& params, std::span<const double> upstream) {
  check_morlet(params);
  if (upstream.size() != static_cast<std::size_t>(params.kernel_len)) {
    throw_invalid(fmt::format("morlet_gradients: adjoint has {} entries, kernel has {}", upstream.size(),
                              params.kernel_len));
  }
  const auto t = morlet_time(params.kernel_len, params.fs);
  const double h = params.h;
  MorletGradient g;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double ti = t[i];
    const double phase = 2.0 * kPi * params.f * ti;
    const double gauss = std::exp(-params.c * ti * ti / (h * h));
    const double cosv = std::cos(phase);
    g.df += upstream[i] * (-2.0 * kPi * ti * std::sin(phase) * gauss);
    g.dh += upstream[i] * (cosv * gauss * 2.0 * params.c * ti * ti / (h * h * h));
    g.dc += upstream[i] * (-cosv * gauss * ti * ti / (h * h));
  }
  return g;
}

void clamp_morlet(MorletParams& params) {
  params.f = std::clamp(params.f, kMinWaveletHz, kMaxWaveletHz);
  params.h = std::max(params.h, kMinWaveletWidth);
}

Spectrogram stft(std::span<const double> signal, int window_len, int hop, double fs) {
  if (hop <= 0) throw_invalid(fmt::format("stft: hop must be positive, got {}", hop));
  if (window_len < 2 || static_cast<std::size_t>(window_len) > signal.size()) {
    throw_invalid(fmt::format("stft: window {} does not fit a signal of {} samples", window_len, signal.size()));
  }
  const auto n = static_cast<std::size_t>(window_len);
  const std::size_t frames = (signal.size() - n) / static_cast<std::size_t>(hop) + 1;
  const std::size_t bins = n / 2 + 1;

  std::vector<double> hann(n);
  for (std::size_t i = 0; i < n; ++i) hann[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * i / (n - 1));
  std::vector<double> cos_table(n), sin_table(n);
  for (std::size_t i = 0; i < n; ++i) {
    cos_table[i] = std::cos(2.0 * kPi * i / n);
    sin_table[i] = std::sin(2.0 * kPi * i / n);
  }

  Spectrogram out;
  out.magnitude = RowMatrix::Zero(static_cast<Eigen::Index>(bins), static_cast<Eigen::Index>(frames));
  out.bin_hz = fs / window_len;
  out.hop_s = hop / fs;
  std::vector<double> frame(n);
  for (std::size_t f = 0; f < frames; ++f) {
    const std::size_t offset = f * static_cast<std::size_t>(hop);
    for (std::size_t i = 0; i < n; ++i) frame[i] = signal[offset + i] * hann[i];
    for (std::size_t k = 0; k < bins; ++k) {
      double re = 0.0, im = 0.0;
      std::size_t idx = 0;
      for (std::size_t i = 0; i < n; ++i) {
        re += frame[i] * cos_table[idx];
        im -= frame[i] * sin_table[idx];
        idx += k;
        if (idx >= n) idx -= n;
      }
      out.magnitude(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(f)) = std::hypot(re, im);
    }
  }
  return out;
}

}  // namespace ccsp::dsp
