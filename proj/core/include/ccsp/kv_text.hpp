#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ccsp {

// Minimal sectioned key/value text:
//
//   # comment
//   [section name]
//   key = value
//
// Keys before the first section header belong to the unnamed section "".
// Order is preserved so that a document can be written back byte-identically.
struct KvEntry {
  std::string key;
  std::string value;
  int line = 0;
};

struct KvSection {
  std::string name;
  int line = 0;
  std::vector<KvEntry> entries;

  const KvEntry* find(std::string_view key) const;
  std::optional<std::string> get(std::string_view key) const;
  // Throws a data error naming `origin` and the section when missing.
  const std::string& require(std::string_view key, std::string_view origin) const;
};

struct KvDocument {
  std::vector<KvSection> sections;

  KvSection& section(std::string_view name);  // creates on demand
  const KvSection* find_section(std::string_view name) const;
  std::string to_string() const;
};

// Throws ccsp::Error(data) with "<origin>:<line>: ..." on malformed lines.
KvDocument parse_kv(std::string_view text, std::string_view origin);

double parse_double(std::string_view text, std::string_view what);
long long parse_int(std::string_view text, std::string_view what);
bool parse_bool(std::string_view text, std::string_view what);
std::vector<std::string> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);

}  // namespace ccsp
