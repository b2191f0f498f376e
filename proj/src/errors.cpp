#include "mcuos/errors.hpp"

namespace mcuos {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::InsufficientObservations: return "InsufficientObservations";
    case ErrorCode::DegenerateNeighborhood: return "DegenerateNeighborhood";
    case ErrorCode::EmptyOverlap: return "EmptyOverlap";
    case ErrorCode::UnsupportedKernel: return "UnsupportedKernel";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::UncoveredCoordinate: return "UncoveredCoordinate";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::TilingError: return "TilingError";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

bool is_data_error(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::RankDeficient:
    case ErrorCode::NumericalFailure:
    case ErrorCode::DegenerateDenominator:
      return false;
    default:
      return true;
  }
}

}  // namespace mcuos
