#include "ccsp/trial_set.hpp"

#include <algorithm>
#include <string_view>

#include <fmt/format.h>

#include "ccsp/error.hpp"

namespace ccsp::data {

const char* to_string(Phase p) { return p == Phase::offline ? "offline" : "online"; }

Phase parse_phase(std::string_view text) {
  if (text == "offline") return Phase::offline;
  if (text == "online") return Phase::online;
  throw_invalid(fmt::format("unknown phase '{}' (expected offline|online)", text));
}

TrialSet::TrialSet(std::size_t channels, std::size_t timepoints, double sample_rate_hz)
    : channels_(channels), timepoints_(timepoints), sample_rate_hz_(sample_rate_hz) {
  if (channels == 0 || timepoints == 0) throw_invalid("trial set: channels and timepoints must be positive");
  if (!(sample_rate_hz > 0.0)) throw_invalid("trial set: sample rate must be positive");
}

namespace {

void check_tags(int label, int session, Phase phase) {
  if (label != 0 && label != 1) throw_data(fmt::format("trial label {} is not 0 or 1", label));
  if (session != 1 && session != 2) throw_data(fmt::format("trial session {} is not 1 or 2", session));
  if (phase != Phase::offline && phase != Phase::online) {
    throw_data(fmt::format("unknown phase tag {}", static_cast<int>(phase)));
  }
}

}  // namespace

void TrialSet::push_back(std::span<const float> samples, int label, int subject, int session, Phase phase) {
  if (samples.size() != trial_size()) {
    throw_data(fmt::format("trial has {} samples, expected {} x {}", samples.size(), channels_, timepoints_));
  }
  check_tags(label, session, phase);
  samples_.insert(samples_.end(), samples.begin(), samples.end());
  labels_.push_back(label);
  subjects_.push_back(subject);
  sessions_.push_back(session);
  phases_.push_back(phase);
}

void TrialSet::push_back(std::span<const double> samples, int label, int subject, int session, Phase phase) {
  std::vector<float> f(samples.begin(), samples.end());
  push_back(std::span<const float>(f), label, subject, session, phase);
}

std::span<const float> TrialSet::trial(std::size_t i) const {
  return std::span<const float>(samples_).subspan(i * trial_size(), trial_size());
}

std::vector<int> TrialSet::subject_ids() const {
  std::vector<int> ids = subjects_;
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

TrialSet TrialSet::subset(std::span<const std::size_t> indices) const {
  TrialSet out(channels_, timepoints_, sample_rate_hz_);
  out.samples_.reserve(indices.size() * trial_size());
  for (auto i : indices) {
    if (i >= size()) throw_invalid(fmt::format("trial index {} out of range ({} trials)", i, size()));
    const auto t = trial(i);
    out.samples_.insert(out.samples_.end(), t.begin(), t.end());
    out.labels_.push_back(labels_[i]);
    out.subjects_.push_back(subjects_[i]);
    out.sessions_.push_back(sessions_[i]);
    out.phases_.push_back(phases_[i]);
  }
  return out;
}

void TrialSet::append(const TrialSet& other) {
  if (other.empty()) return;
  if (channels_ == 0 && empty()) {
    *this = other;
    return;
  }
  if (other.channels_ != channels_ || other.timepoints_ != timepoints_ || other.sample_rate_hz_ != sample_rate_hz_) {
    throw_data(fmt::format("cannot append {}x{} @ {} Hz trials to a {}x{} @ {} Hz set", other.channels_,
                           other.timepoints_, other.sample_rate_hz_, channels_, timepoints_, sample_rate_hz_));
  }
  samples_.insert(samples_.end(), other.samples_.begin(), other.samples_.end());
  labels_.insert(labels_.end(), other.labels_.begin(), other.labels_.end());
  subjects_.insert(subjects_.end(), other.subjects_.begin(), other.subjects_.end());
  sessions_.insert(sessions_.end(), other.sessions_.begin(), other.sessions_.end());
  phases_.insert(phases_.end(), other.phases_.begin(), other.phases_.end());
}

std::vector<double> TrialSet::to_f64() const { return {samples_.begin(), samples_.end()}; }

}  // namespace ccsp::data
