#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace ccsp::data {

enum class Phase : std::uint8_t { offline = 0, online = 1 };

const char* to_string(Phase p);
Phase parse_phase(std::string_view text);

// N trials of C x T samples, stored f32 (channel-major per trial) with
// per-trial tags. Computation happens in f64 via to_f64().
class TrialSet {
 public:
  TrialSet() = default;
  TrialSet(std::size_t channels, std::size_t timepoints, double sample_rate_hz);

  std::size_t size() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }
  std::size_t channels() const noexcept { return channels_; }
  std::size_t timepoints() const noexcept { return timepoints_; }
  std::size_t trial_size() const noexcept { return channels_ * timepoints_; }
  double sample_rate_hz() const noexcept { return sample_rate_hz_; }

  // Throws on wrong sample count, label outside {0,1}, session outside {1,2}.
  void push_back(std::span<const float> samples, int label, int subject, int session, Phase phase);
  void push_back(std::span<const double> samples, int label, int subject, int session, Phase phase);

  std::span<const float> trial(std::size_t i) const;
  int label(std::size_t i) const { return labels_[i]; }
  int subject(std::size_t i) const { return subjects_[i]; }
  int session(std::size_t i) const { return sessions_[i]; }
  Phase phase(std::size_t i) const { return phases_[i]; }

  const std::vector<float>& samples() const noexcept { return samples_; }
  const std::vector<int>& labels() const noexcept { return labels_; }
  const std::vector<int>& subjects() const noexcept { return subjects_; }
  const std::vector<int>& sessions() const noexcept { return sessions_; }
  const std::vector<Phase>& phases() const noexcept { return phases_; }

  // Sorted distinct subject ids.
  std::vector<int> subject_ids() const;
  TrialSet subset(std::span<const std::size_t> indices) const;
  void append(const TrialSet& other);
  std::vector<double> to_f64() const;

  bool operator==(const TrialSet&) const = default;

 private:
  std::size_t channels_ = 0;
  std::size_t timepoints_ = 0;
  double sample_rate_hz_ = 0.0;
  std::vector<float> samples_;
  std::vector<int> labels_;
  std::vector<int> subjects_;
  std::vector<int> sessions_;
  std::vector<Phase> phases_;
};

}  // namespace ccsp::data
