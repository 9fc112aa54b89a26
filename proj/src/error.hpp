#pragma once

#include <stdexcept>
#include <string>

namespace statecal {

// Error taxonomy mirrored by the C API status codes and CLI exit codes.
enum class ErrorCode {
  invalid_argument,
  config,
  io,
  simulator_required,
  simulator_protocol,
  runtime,
};

const char* error_category(ErrorCode code);

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

inline void require(bool ok, ErrorCode code, const std::string& message) {
  if (!ok) fail(code, message);
}

}  // namespace statecal
