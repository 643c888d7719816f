#pragma once

#include <stdexcept>
#include <string>

namespace qmlsel {

enum class ErrorCode {
  InvalidArgument,
  NonStationaryParams,
  NumericOverflow,
  BoundaryTooClose,
  TooShortSeries,
  OptimizerDiverged,
  SingularF,
  MissingInfo,
  AllModelsFailed,
  ParseError,
  ConfigError,
  IoError,
};

const char* to_string(ErrorCode code) noexcept;

/// Library-wide exception. The code identifies the failure class so callers
/// (the CLI, the Monte-Carlo engine) can map it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace qmlsel
