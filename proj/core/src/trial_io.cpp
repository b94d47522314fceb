#include "ccsp/trial_io.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "binary_io.hpp"
#include "ccsp/error.hpp"
#include "ccsp/kv_text.hpp"

namespace ccsp::data {

namespace {

constexpr std::string_view kMagic = "EEGT";

const char* profile_name(Profile p) { return p == Profile::openbmi ? "openbmi" : "synthetic"; }

}  // namespace

std::vector<std::uint8_t> encode_trials(const TrialSet& set) {
  detail::ByteWriter w;
  w.put_bytes(kMagic);
  w.put<std::uint16_t>(kTrialFormatVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(set.size()));
  for (std::size_t i = 0; i < set.size(); ++i) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(set.channels()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(set.timepoints()));
    w.put<std::uint8_t>(static_cast<std::uint8_t>(set.label(i)));
    w.put<std::uint16_t>(static_cast<std::uint16_t>(set.subject(i)));
    w.put<std::uint8_t>(static_cast<std::uint8_t>(set.session(i)));
    w.put<std::uint8_t>(static_cast<std::uint8_t>(set.phase(i)));
    w.put_array<float>(set.trial(i));
  }
  return std::move(w.bytes());
}

TrialSet decode_trials(std::span<const std::uint8_t> bytes, double sample_rate_hz, const std::string& origin) {
  detail::ByteReader r(bytes);
  std::string magic;
  if (!r.get_string(kMagic.size(), magic) || magic != kMagic) throw_data(fmt::format("{}: not a trial file (bad magic)", origin));
  std::uint16_t version = 0;
  std::uint32_t count = 0;
  if (!r.get(version) || !r.get(count)) throw_data(fmt::format("{}: truncated file header", origin));
  if (version != kTrialFormatVersion) throw_data(fmt::format("{}: unsupported trial format version {}", origin, version));

  TrialSet set;
  std::vector<float> buf;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::uint32_t c = 0, t = 0;
    std::uint8_t label = 0, session = 0, phase = 0;
    std::uint16_t subject = 0;
    if (!r.get(c) || !r.get(t) || !r.get(label) || !r.get(subject) || !r.get(session) || !r.get(phase)) {
      throw_data(fmt::format("{}: record {} has a truncated header", origin, i));
    }
    if (c == 0 || t == 0) throw_data(fmt::format("{}: record {} declares an empty {} x {} trial", origin, i, c, t));
    if (i == 0) {
      set = TrialSet(c, t, sample_rate_hz);
    } else if (c != set.channels() || t != set.timepoints()) {
      throw_data(fmt::format("{}: record {} is {} x {}, earlier records are {} x {}", origin, i, c, t, set.channels(),
                             set.timepoints()));
    }
    if (label > 1) throw_data(fmt::format("{}: record {} has label {} (expected 0 or 1)", origin, i, label));
    if (phase > 1) throw_data(fmt::format("{}: record {} has unknown phase tag {}", origin, i, phase));
    buf.resize(static_cast<std::size_t>(c) * t);
    if (!r.get_array(buf.size(), buf.data())) {
      throw_data(fmt::format("{}: record {} is truncated (length mismatch)", origin, i));
    }
    try {
      set.push_back(std::span<const float>(buf), label, subject, session, static_cast<Phase>(phase));
    } catch (const Error& e) {
      throw_data(fmt::format("{}: record {}: {}", origin, i, e.what()));
    }
  }
  if (r.remaining() != 0) throw_data(fmt::format("{}: {} trailing bytes (length mismatch)", origin, r.remaining()));
  return set;
}

int& BlockCounts::at(int session, Phase phase) {
  if (session == 1) return phase == Phase::offline ? s1_offline : s1_online;
  if (session == 2) return phase == Phase::offline ? s2_offline : s2_online;
  throw_data(fmt::format("session {} is not 1 or 2", session));
}

std::string DatasetManifest::to_text() const {
  KvDocument doc;
  auto& ds = doc.section("dataset");
  const auto put = [](KvSection& s, std::string k, std::string v) { s.entries.push_back({std::move(k), std::move(v), 0}); };
  put(ds, "format_version", fmt::format("{}", format_version));
  put(ds, "profile", profile_name(profile));
  put(ds, "sample_rate_hz", fmt::format("{}", sample_rate_hz));
  put(ds, "channels", fmt::format("{}", channels));
  put(ds, "timepoints", fmt::format("{}", timepoints));
  put(ds, "channel_names", fmt::format("{}", fmt::join(channel_names, ",")));
  put(ds, "non_separable", non_separable ? "true" : "false");
  std::vector<int> ids;
  for (const auto& s : subjects) ids.push_back(s.id);
  put(ds, "subjects", fmt::format("{}", fmt::join(ids, ",")));
  for (const auto& s : subjects) {
    auto& sec = doc.section(fmt::format("subject {}", s.id));
    put(sec, "file", s.file);
    put(sec, "bytes", fmt::format("{}", s.bytes));
    put(sec, "s1_offline", fmt::format("{}", s.counts.s1_offline));
    put(sec, "s1_online", fmt::format("{}", s.counts.s1_online));
    put(sec, "s2_offline", fmt::format("{}", s.counts.s2_offline));
    put(sec, "s2_online", fmt::format("{}", s.counts.s2_online));
  }
  return doc.to_string();
}

DatasetManifest DatasetManifest::parse(std::string_view text, const std::string& origin) {
  const auto doc = parse_kv(text, origin);
  const auto* ds = doc.find_section("dataset");
  if (ds == nullptr) throw_data(fmt::format("{}: missing [dataset] section", origin));
  DatasetManifest m;
  m.format_version = static_cast<int>(parse_int(ds->require("format_version", origin), "format_version"));
  if (m.format_version != 1) throw_data(fmt::format("{}: unsupported manifest format_version {}", origin, m.format_version));
  const auto& profile = ds->require("profile", origin);
  if (profile == "openbmi") {
    m.profile = Profile::openbmi;
  } else if (profile == "synthetic") {
    m.profile = Profile::synthetic;
  } else {
    throw_data(fmt::format("{}: unknown profile '{}'", origin, profile));
  }
  m.sample_rate_hz = parse_double(ds->require("sample_rate_hz", origin), "sample_rate_hz");
  m.channels = static_cast<int>(parse_int(ds->require("channels", origin), "channels"));
  m.timepoints = static_cast<int>(parse_int(ds->require("timepoints", origin), "timepoints"));
  if (m.channels <= 0 || m.timepoints <= 0 || !(m.sample_rate_hz > 0.0)) {
    throw_data(fmt::format("{}: channels, timepoints and sample_rate_hz must be positive", origin));
  }
  if (auto names = ds->get("channel_names"); names && !trim(*names).empty()) m.channel_names = split(*names, ',');
  if (!m.channel_names.empty() && m.channel_names.size() != static_cast<std::size_t>(m.channels)) {
    throw_data(fmt::format("{}: {} channel names for {} channels", origin, m.channel_names.size(), m.channels));
  }
  if (auto ns = ds->get("non_separable")) m.non_separable = parse_bool(*ns, "non_separable");
  for (const auto& part : split(ds->require("subjects", origin), ',')) {
    SubjectEntry e;
    e.id = static_cast<int>(parse_int(part, "subjects"));
    const auto name = fmt::format("subject {}", e.id);
    const auto* sec = doc.find_section(name);
    if (sec == nullptr) throw_data(fmt::format("{}: subject {} listed but no [{}] section", origin, e.id, name));
    e.file = sec->require("file", origin);
    e.bytes = static_cast<std::uint64_t>(parse_int(sec->require("bytes", origin), "bytes"));
    e.counts.s1_offline = static_cast<int>(parse_int(sec->require("s1_offline", origin), "s1_offline"));
    e.counts.s1_online = static_cast<int>(parse_int(sec->require("s1_online", origin), "s1_online"));
    e.counts.s2_offline = static_cast<int>(parse_int(sec->require("s2_offline", origin), "s2_offline"));
    e.counts.s2_online = static_cast<int>(parse_int(sec->require("s2_online", origin), "s2_online"));
    if (m.profile == Profile::openbmi && !(e.counts == BlockCounts{100, 100, 100, 100})) {
      throw_data(fmt::format("{}: openbmi profile needs 100 trials per (session, phase) block; subject {} differs",
                             origin, e.id));
    }
    for (const auto& prev : m.subjects) {
      if (prev.id == e.id) throw_data(fmt::format("{}: subject {} listed twice", origin, e.id));
    }
    m.subjects.push_back(std::move(e));
  }
  if (m.subjects.empty()) throw_data(fmt::format("{}: no subjects listed", origin));
  return m;
}

void DatasetManifest::validate_files(const std::filesystem::path& dir) const {
  for (const auto& s : subjects) {
    const auto path = dir / s.file;
    std::error_code ec;
    const auto size = std::filesystem::file_size(path, ec);
    if (ec) throw_data(fmt::format("subject {}: trial file '{}' is missing", s.id, path.string()));
    if (size != s.bytes) {
      throw_data(fmt::format("subject {}: '{}' is {} bytes, manifest declares {}", s.id, path.string(), size, s.bytes));
    }
  }
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path.string());
  auto m = DatasetManifest::parse(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()), path.string());
  m.validate_files(path.parent_path());
  return m;
}

bool TrialFilter::accepts(int subject, int session, Phase phase) const {
  if (subjects && std::find(subjects->begin(), subjects->end(), subject) == subjects->end()) return false;
  if (sessions && std::find(sessions->begin(), sessions->end(), session) == sessions->end()) return false;
  if (phases && std::find(phases->begin(), phases->end(), phase) == phases->end()) return false;
  return true;
}

TrialSet load_trials(const std::filesystem::path& manifest_path, const TrialFilter& filter) {
  const auto m = read_manifest(manifest_path);
  if (filter.subjects) {
    for (int id : *filter.subjects) {
      if (std::none_of(m.subjects.begin(), m.subjects.end(), [id](const auto& s) { return s.id == id; })) {
        throw_data(fmt::format("{}: subject {} is not in the manifest", manifest_path.string(), id));
      }
    }
  }
  TrialSet out(static_cast<std::size_t>(m.channels), static_cast<std::size_t>(m.timepoints), m.sample_rate_hz);
  for (const auto& s : m.subjects) {
    if (filter.subjects && std::find(filter.subjects->begin(), filter.subjects->end(), s.id) == filter.subjects->end()) {
      continue;
    }
    const auto path = manifest_path.parent_path() / s.file;
    const auto set = decode_trials(detail::read_file(path.string()), m.sample_rate_hz, path.string());
    if (!set.empty() && (set.channels() != static_cast<std::size_t>(m.channels) ||
                         set.timepoints() != static_cast<std::size_t>(m.timepoints))) {
      throw_data(fmt::format("{}: trials are {} x {}, manifest declares {} x {}", path.string(), set.channels(),
                             set.timepoints(), m.channels, m.timepoints));
    }
    BlockCounts seen;
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < set.size(); ++i) {
      if (set.subject(i) != s.id) {
        throw_data(fmt::format("{}: record {} belongs to subject {}, expected {}", path.string(), i, set.subject(i), s.id));
      }
      ++seen.at(set.session(i), set.phase(i));
      if (filter.accepts(s.id, set.session(i), set.phase(i))) keep.push_back(i);
    }
    if (!(seen == s.counts)) {
      throw_data(fmt::format("{}: block counts ({}, {}, {}, {}) differ from the manifest ({}, {}, {}, {})", path.string(),
                             seen.s1_offline, seen.s1_online, seen.s2_offline, seen.s2_online, s.counts.s1_offline,
                             s.counts.s1_online, s.counts.s2_offline, s.counts.s2_online));
    }
    out.append(set.subset(keep));
  }
  return out;
}

std::filesystem::path write_dataset(const TrialSet& set, const std::filesystem::path& dir, const DatasetInfo& info) {
  if (set.empty()) throw_invalid("write_dataset: empty trial set");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw_io(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));

  DatasetManifest m;
  m.profile = info.profile;
  m.sample_rate_hz = set.sample_rate_hz();
  m.channels = static_cast<int>(set.channels());
  m.timepoints = static_cast<int>(set.timepoints());
  m.channel_names = info.channel_names;
  if (m.channel_names.empty()) {
    for (int c = 1; c <= m.channels; ++c) m.channel_names.push_back(fmt::format("ch{}", c));
  }
  m.non_separable = info.non_separable;
  for (int id : set.subject_ids()) {
    std::vector<std::size_t> idx;
    SubjectEntry e;
    e.id = id;
    for (std::size_t i = 0; i < set.size(); ++i) {
      if (set.subject(i) == id) {
        idx.push_back(i);
        ++e.counts.at(set.session(i), set.phase(i));
      }
    }
    const auto bytes = encode_trials(set.subset(idx));
    e.file = fmt::format("subject_{:03d}.eegt", id);
    e.bytes = bytes.size();
    detail::write_file((dir / e.file).string(), bytes);
    m.subjects.push_back(std::move(e));
  }
  // Round-trip through the parser so a written manifest is always loadable.
  const auto text = m.to_text();
  (void)DatasetManifest::parse(text, "generated manifest");
  const auto path = dir / "manifest.txt";
  detail::write_file(path.string(), std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  return path;
}

}  // namespace ccsp::data
