#include "plots.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <fmt/format.h>

#include "ccsp/error.hpp"
#include "ccsp/ops.hpp"
#include "svg.hpp"

namespace ccsp::cli {

namespace {

std::vector<double> row(std::span<const double> trial, std::size_t t, std::size_t channel) {
  return {trial.begin() + static_cast<std::ptrdiff_t>(channel * t),
          trial.begin() + static_cast<std::ptrdiff_t>((channel + 1) * t)};
}

std::string panel_title(const StftPanel& p) {
  if (p.kernel < 0) return p.stage;
  return fmt::format("{} k{}", p.stage, p.kernel + 1);
}

}  // namespace

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw_io(fmt::format("cannot write '{}'", path.string()));
}

std::vector<StftPanel> stft_raw(std::span<const double> trial, std::size_t channels, std::size_t channel, double fs) {
  if (channels == 0 || trial.size() % channels != 0) throw_invalid("stft: trial size does not match channel count");
  if (channel >= channels) throw_invalid(fmt::format("stft: channel {} out of range (C={})", channel, channels));
  const std::size_t t = trial.size() / channels;
  return {StftPanel{"raw", -1, dsp::stft(row(trial, t, channel), kStftWindow, kStftHop, fs)}};
}

std::vector<StftPanel> stft_stages(Model& model, std::span<const double> trial, std::size_t channel) {
  const auto& cfg = model.config();
  const auto c = static_cast<std::size_t>(cfg.n_channels);
  const auto t = static_cast<std::size_t>(cfg.n_timepoints);
  if (trial.size() != c * t) {
    throw_invalid(fmt::format("stft: trial has {} samples, model expects {}x{}", trial.size(), c, t));
  }
  auto panels = stft_raw(trial, c, channel, cfg.sample_rate_hz);
  const auto signal = row(trial, t, channel);

  if (model.has_wavelet_stage()) {
    const auto bank = ad::morlet_bank(ad::Var::constant(model.wavelet_params().value()), cfg.wavelet_len,
                                      cfg.sample_rate_hz);
    const auto x = ad::Var::constant(ad::Tensor({1, 1, 1, t}, signal));
    const auto y = ad::conv_temporal(x, bank).value();
    for (std::size_t k = 0; k < y.dim(1); ++k) {
      const std::span<const double> out(y.raw() + k * t, t);
      panels.push_back(StftPanel{"wkcnn", static_cast<int>(k), dsp::stft(out, kStftWindow, kStftHop, cfg.sample_rate_hz)});
    }
  }
  const auto maps = model.spectral_maps(trial);
  for (std::size_t k = 0; k < maps.dim(0); ++k) {
    const std::span<const double> out(maps.raw() + (k * c + channel) * t, t);
    panels.push_back(StftPanel{"tcnn", static_cast<int>(k), dsp::stft(out, kStftWindow, kStftHop, cfg.sample_rate_hz)});
  }
  return panels;
}

void write_stft_csv(const std::vector<StftPanel>& panels, const std::filesystem::path& path) {
  std::string s = "stage,kernel,time_s,freq_hz,magnitude\n";
  for (const auto& p : panels) {
    const auto& m = p.spec.magnitude;
    for (Eigen::Index f = 0; f < m.rows(); ++f) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        s += fmt::format("{},{},{:.3f},{:.3f},{:.9g}\n", p.stage, p.kernel + 1, static_cast<double>(j) * p.spec.hop_s,
                         static_cast<double>(f) * p.spec.bin_hz, m(f, j));
      }
    }
  }
  write_text(path, s);
}

std::string stft_svg(const std::vector<StftPanel>& panels, std::string_view title) {
  constexpr double kPanelW = 220, kPanelH = 160, kPad = 40;
  const std::size_t cols = std::max<std::size_t>(1, std::min<std::size_t>(4, panels.size()));
  const std::size_t rows = (panels.size() + cols - 1) / cols;
  Svg svg(kPad + static_cast<double>(cols) * (kPanelW + kPad), 2 * kPad + static_cast<double>(rows) * (kPanelH + kPad));
  svg.text(kPad, 24, title, 14);
  for (std::size_t i = 0; i < panels.size(); ++i) {
    const auto& m = panels[i].spec.magnitude;
    const double x0 = kPad + static_cast<double>(i % cols) * (kPanelW + kPad);
    const double y0 = 2 * kPad + static_cast<double>(i / cols) * (kPanelH + kPad);
    const double peak = m.size() > 0 ? m.maxCoeff() : 0.0;
    const double cw = kPanelW / static_cast<double>(std::max<Eigen::Index>(1, m.cols()));
    const double ch = kPanelH / static_cast<double>(std::max<Eigen::Index>(1, m.rows()));
    for (Eigen::Index f = 0; f < m.rows(); ++f) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        // low frequencies at the bottom
        svg.rect(x0 + static_cast<double>(j) * cw, y0 + kPanelH - static_cast<double>(f + 1) * ch, cw + 0.05, ch + 0.05,
                 heat_color(peak > 0.0 ? m(f, j) / peak : 0.0));
      }
    }
    svg.rect(x0, y0, kPanelW, kPanelH, "none", "black");
    svg.text(x0, y0 - 6, panel_title(panels[i]), 12);
    svg.text(x0 - 4, y0 + kPanelH, "0 Hz", 9, "end");
    svg.text(x0 - 4, y0 + 9, fmt::format("{:.0f} Hz", static_cast<double>(m.rows()) * panels[i].spec.bin_hz), 9, "end");
    svg.text(x0 + kPanelW, y0 + kPanelH + 12,
             fmt::format("{:.1f} s", static_cast<double>(m.cols()) * panels[i].spec.hop_s), 9, "end");
  }
  return svg.finish();
}

std::vector<ScatterPoint> csp_scatter(const Model& model, std::span<const double> samples, std::size_t n,
                                      std::span<const int> labels) {
  if (labels.size() != n) throw_invalid("scatter: label count mismatch");
  const Matrix f = model.csp_features(samples, n);
  const auto branches = static_cast<int>(f.cols()) / csp::kFeaturesPerBranch;
  std::vector<ScatterPoint> points;
  points.reserve(static_cast<std::size_t>(branches) * n);
  for (int b = 0; b < branches; ++b) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      points.push_back(ScatterPoint{b, i, labels[i], f(r, b * csp::kFeaturesPerBranch),
                                    f(r, b * csp::kFeaturesPerBranch + csp::kFeaturesPerBranch - 1)});
    }
  }
  return points;
}

void write_scatter_csv(const std::vector<ScatterPoint>& points, const std::filesystem::path& path) {
  std::string s = "branch,trial,label,x,y\n";
  for (const auto& p : points) s += fmt::format("{},{},{},{:.9g},{:.9g}\n", p.branch + 1, p.trial, p.label, p.x, p.y);
  write_text(path, s);
}

std::string scatter_svg(const std::vector<ScatterPoint>& points, std::string_view title) {
  constexpr double kPanel = 220, kPad = 40;
  int branches = 0;
  for (const auto& p : points) branches = std::max(branches, p.branch + 1);
  Svg svg(kPad + std::max(1, branches) * (kPanel + kPad), 3 * kPad + kPanel);
  svg.text(kPad, 24, title, 14);
  for (int b = 0; b < branches; ++b) {
    double lo_x = std::numeric_limits<double>::infinity(), hi_x = -lo_x, lo_y = lo_x, hi_y = -lo_x;
    for (const auto& p : points) {
      if (p.branch != b) continue;
      lo_x = std::min(lo_x, p.x);
      hi_x = std::max(hi_x, p.x);
      lo_y = std::min(lo_y, p.y);
      hi_y = std::max(hi_y, p.y);
    }
    const double x0 = kPad + b * (kPanel + kPad), y0 = 2 * kPad;
    const auto sx = [&](double v) { return x0 + 6 + (kPanel - 12) * (hi_x > lo_x ? (v - lo_x) / (hi_x - lo_x) : 0.5); };
    const auto sy = [&](double v) { return y0 + kPanel - 6 - (kPanel - 12) * (hi_y > lo_y ? (v - lo_y) / (hi_y - lo_y) : 0.5); };
    svg.rect(x0, y0, kPanel, kPanel, "none", "black");
    svg.text(x0, y0 - 6, fmt::format("branch {}", b + 1), 12);
    for (const auto& p : points) {
      if (p.branch == b) svg.circle(sx(p.x), sy(p.y), 3.0, p.label == 0 ? "#1f77b4" : "#d62728", 0.7);
    }
    svg.text(x0 + kPanel / 2, y0 + kPanel + 16, "first filter", 10, "middle");
  }
  svg.text(kPad, 3 * kPad + kPanel - 8, "blue: class 0, red: class 1", 10);
  return svg.finish();
}

}  // namespace ccsp::cli
