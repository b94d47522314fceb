#include "ccsp/kv_text.hpp"

#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "ccsp/error.hpp"

namespace ccsp {

std::string_view trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return text.substr(first, last - first + 1);
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    out.emplace_back(trim(text.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

const KvEntry* KvSection::find(std::string_view key) const {
  for (const auto& e : entries) {
    if (e.key == key) return &e;
  }
  return nullptr;
}

std::optional<std::string> KvSection::get(std::string_view key) const {
  if (const auto* e = find(key)) return e->value;
  return std::nullopt;
}

const std::string& KvSection::require(std::string_view key, std::string_view origin) const {
  const auto* e = find(key);
  if (e == nullptr) {
    throw_data(fmt::format("{}: section [{}] is missing key '{}'", origin, name, key));
  }
  return e->value;
}

KvSection& KvDocument::section(std::string_view name) {
  for (auto& s : sections) {
    if (s.name == name) return s;
  }
  sections.push_back(KvSection{std::string(name), 0, {}});
  return sections.back();
}

const KvSection* KvDocument::find_section(std::string_view name) const {
  for (const auto& s : sections) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

std::string KvDocument::to_string() const {
  std::string out;
  bool first = true;
  for (const auto& s : sections) {
    if (s.name.empty() && s.entries.empty()) continue;
    if (!s.name.empty()) {
      if (!first) out += '\n';
      out += fmt::format("[{}]\n", s.name);
    }
    for (const auto& e : s.entries) out += fmt::format("{} = {}\n", e.key, e.value);
    first = false;
  }
  return out;
}

KvDocument parse_kv(std::string_view text, std::string_view origin) {
  KvDocument doc;
  KvSection* current = &doc.section("");
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    const auto line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    if (line.empty() || line.front() == '#') {
      if (end == text.size()) break;
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw_data(fmt::format("{}:{}: unterminated section header", origin, line_no));
      }
      const auto name = trim(line.substr(1, line.size() - 2));
      if (doc.find_section(name) != nullptr && !name.empty()) {
        throw_data(fmt::format("{}:{}: duplicate section [{}]", origin, line_no, name));
      }
      current = &doc.section(name);
      current->line = line_no;
    } else {
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) {
        throw_data(fmt::format("{}:{}: expected 'key = value'", origin, line_no));
      }
      const auto key = trim(line.substr(0, eq));
      if (key.empty()) throw_data(fmt::format("{}:{}: empty key", origin, line_no));
      if (current->find(key) != nullptr) {
        throw_data(fmt::format("{}:{}: duplicate key '{}'", origin, line_no, key));
      }
      current->entries.push_back(KvEntry{std::string(key), std::string(trim(line.substr(eq + 1))), line_no});
    }
    if (end == text.size()) break;
  }
  return doc;
}

double parse_double(std::string_view text, std::string_view what) {
  text = trim(text);
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw_invalid(fmt::format("{}: '{}' is not a finite number", what, text));
  }
  return value;
}

long long parse_int(std::string_view text, std::string_view what) {
  text = trim(text);
  long long value = 0;
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), last, value);
  if (ec != std::errc() || ptr != last) {
    throw_invalid(fmt::format("{}: '{}' is not an integer", what, text));
  }
  return value;
}

bool parse_bool(std::string_view text, std::string_view what) {
  text = trim(text);
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw_invalid(fmt::format("{}: '{}' is not a boolean", what, text));
}

}  // namespace ccsp
