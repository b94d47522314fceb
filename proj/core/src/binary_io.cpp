#include "binary_io.hpp"

#include <fstream>
#include <iterator>

#include <fmt/format.h>

#include "ccsp/error.hpp"

namespace ccsp::detail {

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_io(fmt::format("cannot open '{}' for reading", path));
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw_io(fmt::format("error reading '{}'", path));
  return bytes;
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw_io(fmt::format("cannot open '{}' for writing", path));
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw_io(fmt::format("error writing '{}'", path));
}

}  // namespace ccsp::detail
