#include "qmlsel/errors.hpp"

namespace qmlsel {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonStationaryParams: return "NonStationaryParams";
    case ErrorCode::NumericOverflow: return "NumericOverflow";
    case ErrorCode::BoundaryTooClose: return "BoundaryTooClose";
    case ErrorCode::TooShortSeries: return "TooShortSeries";
    case ErrorCode::OptimizerDiverged: return "OptimizerDiverged";
    case ErrorCode::SingularF: return "SingularF";
    case ErrorCode::MissingInfo: return "MissingInfo";
    case ErrorCode::AllModelsFailed: return "AllModelsFailed";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(what), code_(code) {}

}  // namespace qmlsel
