#include "ccsp/preprocess.hpp"

#include <fmt/format.h>

#include "ccsp/error.hpp"

namespace ccsp::data {

RowMatrix preprocess_trial(const RowMatrix& trial, double source_hz, const PreprocessOptions& options) {
  RowMatrix out = dsp::trim_and_downsample(trial, options.window, options.target_hz, source_hz);
  dsp::filter_rows(dsp::design_bandpass(options.band_low_hz, options.band_high_hz, options.band_order, options.target_hz),
                   out);
  return out;
}

TrialSet preprocess(const TrialSet& raw, const PreprocessOptions& options) {
  if (raw.empty()) throw_invalid("preprocess: empty trial set");
  const auto c = static_cast<Eigen::Index>(raw.channels());
  const auto t = static_cast<Eigen::Index>(raw.timepoints());
  const auto band = dsp::design_bandpass(options.band_low_hz, options.band_high_hz, options.band_order, options.target_hz);

  TrialSet out;
  RowMatrix trial(c, t);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto src = raw.trial(i);
    for (Eigen::Index k = 0; k < c * t; ++k) trial.data()[k] = src[static_cast<std::size_t>(k)];
    RowMatrix y;
    try {
      y = dsp::trim_and_downsample(trial, options.window, options.target_hz, raw.sample_rate_hz());
      dsp::filter_rows(band, y);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::numerical) throw_numerical(fmt::format("preprocess: trial {}: {}", i, e.what()));
      throw;
    }
    if (i == 0) out = TrialSet(raw.channels(), static_cast<std::size_t>(y.cols()), options.target_hz);
    out.push_back(std::span<const double>(y.data(), static_cast<std::size_t>(y.size())), raw.label(i), raw.subject(i),
                  raw.session(i), raw.phase(i));
  }
  return out;
}

}  // namespace ccsp::data
