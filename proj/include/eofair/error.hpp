#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace eofair {

// Coarse error classes; the CLI maps each to a distinct exit code.
enum class ErrorCategory {
  internal = 1,
  config = 2,
  parse = 3,
  validation = 4,
  io = 5,
  unsupported = 6,
};

std::string_view to_string(ErrorCategory c) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

[[noreturn]] inline void fail(ErrorCategory c, const std::string& msg) { throw Error(c, msg); }

inline void require(bool cond, ErrorCategory c, const std::string& msg) {
  if (!cond) fail(c, msg);
}

}  // namespace eofair
