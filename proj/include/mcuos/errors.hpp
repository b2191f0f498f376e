#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mcuos {

enum class ErrorCode {
  InvalidArgument,
  ShapeMismatch,
  RankDeficient,
  NumericalFailure,
  InsufficientData,
  InsufficientObservations,
  DegenerateNeighborhood,
  EmptyOverlap,
  UnsupportedKernel,
  DegenerateDenominator,
  UncoveredCoordinate,
  ParseError,
  TilingError,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Whether an error stems from bad inputs (as opposed to a numerical breakdown).
bool is_data_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace mcuos
