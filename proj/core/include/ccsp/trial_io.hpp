#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ccsp/trial_set.hpp"

namespace ccsp::data {

// Trial file: "EEGT", u16 version, u32 record count, then per record
// u32 C, u32 T, u8 label, u16 subject, u8 session, u8 phase and C*T
// little-endian f32 samples, channel-major.
inline constexpr std::uint16_t kTrialFormatVersion = 1;

std::vector<std::uint8_t> encode_trials(const TrialSet& set);
// `origin` names the source in error messages. The sample rate is not stored
// per record and comes from the manifest.
TrialSet decode_trials(std::span<const std::uint8_t> bytes, double sample_rate_hz, const std::string& origin);

enum class Profile { synthetic, openbmi };

struct BlockCounts {
  int s1_offline = 0;
  int s1_online = 0;
  int s2_offline = 0;
  int s2_online = 0;
  int total() const { return s1_offline + s1_online + s2_offline + s2_online; }
  int& at(int session, Phase phase);
  bool operator==(const BlockCounts&) const = default;
};

struct SubjectEntry {
  int id = 0;
  std::string file;  // relative to the manifest directory
  std::uint64_t bytes = 0;
  BlockCounts counts;
};

struct DatasetManifest {
  int format_version = 1;
  Profile profile = Profile::synthetic;
  double sample_rate_hz = 1000.0;
  int channels = 0;
  int timepoints = 0;
  std::vector<std::string> channel_names;
  bool non_separable = false;
  std::vector<SubjectEntry> subjects;

  std::string to_text() const;
  // Parses and checks internal consistency. File existence is checked by
  // validate_files.
  static DatasetManifest parse(std::string_view text, const std::string& origin);
  void validate_files(const std::filesystem::path& dir) const;
};

DatasetManifest read_manifest(const std::filesystem::path& path);

struct TrialFilter {
  std::optional<std::vector<int>> subjects;
  std::optional<std::vector<int>> sessions;
  std::optional<std::vector<Phase>> phases;
  bool accepts(int subject, int session, Phase phase) const;
};

TrialSet load_trials(const std::filesystem::path& manifest_path, const TrialFilter& filter = {});

struct DatasetInfo {
  Profile profile = Profile::synthetic;
  std::vector<std::string> channel_names;  // default ch1..chC
  bool non_separable = false;
};

// Writes one "subject_<id>.eegt" file per subject plus "manifest.txt" into
// `dir` and returns the manifest path.
std::filesystem::path write_dataset(const TrialSet& set, const std::filesystem::path& dir, const DatasetInfo& info = {});

}  // namespace ccsp::data
