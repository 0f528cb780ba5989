#include "pact/error.hpp"

namespace pact {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::internal: return "internal";
    case ErrorCode::usage: return "usage";
    case ErrorCode::io: return "io";
    case ErrorCode::checksum_mismatch: return "checksum_mismatch";
    case ErrorCode::truncated_payload: return "truncated_payload";
    case ErrorCode::container_dimensions: return "container_dimensions";
    case ErrorCode::kind_mismatch: return "kind_mismatch";
    case ErrorCode::config_schema: return "config_schema";
    case ErrorCode::shape_mismatch: return "shape_mismatch";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::numerical: return "numerical";
  }
  return "unknown";
}

}  // namespace pact
