#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace wieat {

enum class ErrorCode {
  MalformedHeader,
  NonMonotoneTimestamps,
  NonFiniteValue,
  WrongColumnCount,
  IoFailure,
  InvalidScenario,
  WindowTooLarge,
  WindowTooSmall,
  InvalidBand,
  SeriesTooShort,
  SegmentTooShort,
  DegenerateData,
  InsufficientData,
  SingleClass,
  IntervalTooShort,
  ZeroTotal,
  ZeroGroundTruth,
  InvalidConfig,
  InvalidModel,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, std::optional<long> row = std::nullopt,
        std::optional<long> column = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<long> row() const noexcept { return row_; }
  std::optional<long> column() const noexcept { return column_; }
  const std::string& stage() const noexcept { return stage_; }

  /// Returns a copy tagged with the pipeline stage that raised it.
  Error with_stage(std::string stage) const;

 private:
  ErrorCode code_;
  std::optional<long> row_;
  std::optional<long> column_;
  std::string stage_;
};

}  // namespace wieat
