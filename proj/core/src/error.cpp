#include "team/error.hpp"

namespace team {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDomain: return "DOMAIN_ERROR";
    case ErrorCode::kDegenerateGeometry: return "DEGENERATE_GEOMETRY";
    case ErrorCode::kInconsistentRanges: return "INCONSISTENT_RANGES";
    case ErrorCode::kUnreliableHeading: return "UNRELIABLE_HEADING";
    case ErrorCode::kConfig: return "CONFIG_ERROR";
    case ErrorCode::kIo: return "IO_ERROR";
    case ErrorCode::kComparison: return "COMPARISON_ERROR";
  }
  return "UNKNOWN_ERROR";
}

}  // namespace team
