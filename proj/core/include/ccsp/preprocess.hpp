#pragma once

#include "ccsp/dsp.hpp"
#include "ccsp/trial_set.hpp"

namespace ccsp::data {

struct PreprocessOptions {
  dsp::TimeWindowMs window{1000.0, 3500.0};
  double target_hz = 100.0;
  double band_low_hz = 8.0;
  double band_high_hz = 30.0;
  int band_order = 5;
};

// Per trial and channel: cut the window, anti-alias and decimate to
// target_hz, then forward-filter with the Butterworth band-pass.
TrialSet preprocess(const TrialSet& raw, const PreprocessOptions& options = {});

// Same pipeline on one C x T trial.
RowMatrix preprocess_trial(const RowMatrix& trial, double source_hz, const PreprocessOptions& options = {});

}  // namespace ccsp::data
