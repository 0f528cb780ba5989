#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pact {

// Each code maps to a distinct process exit status in the CLI.
enum class ErrorCode : int {
  internal = 1,
  usage = 2,
  io = 3,
  checksum_mismatch = 4,
  truncated_payload = 5,
  container_dimensions = 6,
  kind_mismatch = 7,
  config_schema = 8,
  shape_mismatch = 9,
  invalid_argument = 10,
  numerical = 11,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace pact
