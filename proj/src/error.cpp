#include "cpcell/error.hpp"

namespace cpcell {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::InvalidRegion: return "InvalidRegion";
    case ErrorCode::RegionOutsideGrid: return "RegionOutsideGrid";
    case ErrorCode::DegenerateRegion: return "DegenerateRegion";
    case ErrorCode::OmegaUndefined: return "OmegaUndefined";
    case ErrorCode::FrontierTooNarrow: return "FrontierTooNarrow";
    case ErrorCode::GapBetweenDomains: return "GapBetweenDomains";
    case ErrorCode::NoClosedForm: return "NoClosedForm";
    case ErrorCode::UnnormalizedDensity: return "UnnormalizedDensity";
    case ErrorCode::EscapeDetected: return "EscapeDetected";
    case ErrorCode::SeedOffShell: return "SeedOffShell";
    case ErrorCode::FoldResolutionExceeded: return "FoldResolutionExceeded";
    case ErrorCode::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorCode::NotDecaying: return "NotDecaying";
    case ErrorCode::NotSelfAdjoint: return "NotSelfAdjoint";
    case ErrorCode::BasisMismatch: return "BasisMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
  }
  return "Unknown";
}

}  // namespace cpcell
