#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ccsp/dsp.hpp"
#include "ccsp/model.hpp"

namespace ccsp::cli {

// One time-frequency grid: stage is "raw", "wkcnn" or "tcnn"; kernel is -1
// for the raw signal.
struct StftPanel {
  std::string stage;
  int kernel = -1;
  dsp::Spectrogram spec;
};

inline constexpr int kStftWindow = 50;
inline constexpr int kStftHop = 5;

// STFT of one channel of one pre-processed trial (C x T) before the model,
// after each wavelet kernel and after the full spectral stage.
std::vector<StftPanel> stft_stages(Model& model, std::span<const double> trial, std::size_t channel);
// Raw stage only.
std::vector<StftPanel> stft_raw(std::span<const double> trial, std::size_t channels, std::size_t channel, double fs);

// stage,kernel,time_s,freq_hz,magnitude
void write_stft_csv(const std::vector<StftPanel>& panels, const std::filesystem::path& path);
std::string stft_svg(const std::vector<StftPanel>& panels, std::string_view title);

struct ScatterPoint {
  int branch = 0;
  std::size_t trial = 0;
  int label = 0;
  double x = 0.0;  // log-variance through the first filter
  double y = 0.0;  // log-variance through the last filter
};

std::vector<ScatterPoint> csp_scatter(const Model& model, std::span<const double> samples, std::size_t n,
                                      std::span<const int> labels);
// branch,trial,label,x,y
void write_scatter_csv(const std::vector<ScatterPoint>& points, const std::filesystem::path& path);
std::string scatter_svg(const std::vector<ScatterPoint>& points, std::string_view title);

void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace ccsp::cli
