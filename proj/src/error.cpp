#include "error.hpp"

namespace statecal {

const char* error_category(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::config: return "config";
    case ErrorCode::io: return "io";
    case ErrorCode::simulator_required: return "simulator_required";
    case ErrorCode::simulator_protocol: return "simulator_protocol";
    case ErrorCode::runtime: return "runtime";
  }
  return "runtime";
}

}  // namespace statecal
