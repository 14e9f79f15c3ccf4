#include "wieat/error.hpp"

#include <utility>

namespace wieat {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::NonMonotoneTimestamps: return "NonMonotoneTimestamps";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::WrongColumnCount: return "WrongColumnCount";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::InvalidScenario: return "InvalidScenario";
    case ErrorCode::WindowTooLarge: return "WindowTooLarge";
    case ErrorCode::WindowTooSmall: return "WindowTooSmall";
    case ErrorCode::InvalidBand: return "InvalidBand";
    case ErrorCode::SeriesTooShort: return "SeriesTooShort";
    case ErrorCode::SegmentTooShort: return "SegmentTooShort";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::IntervalTooShort: return "IntervalTooShort";
    case ErrorCode::ZeroTotal: return "ZeroTotal";
    case ErrorCode::ZeroGroundTruth: return "ZeroGroundTruth";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, std::string message, std::optional<long> row, std::optional<long> column)
    : std::runtime_error(std::move(message)), code_(code), row_(row), column_(column) {}

Error Error::with_stage(std::string stage) const {
  Error copy = *this;
  copy.stage_ = std::move(stage);
  return copy;
}

}  // namespace wieat
