#pragma once

#include <stdexcept>
#include <string>

namespace ccsp {

// Coarse classification used by the CLI to pick an exit code.
enum class ErrorKind {
  invalid_argument,  // bad call / usage / config
  data,              // malformed or inconsistent input files
  numerical,         // non-finite values, singular systems
  io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void throw_invalid(const std::string& what);
[[noreturn]] void throw_data(const std::string& what);
[[noreturn]] void throw_numerical(const std::string& what);
[[noreturn]] void throw_io(const std::string& what);

}  // namespace ccsp
