#pragma once

#include "wieat/types.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace wieat {

/// A timestamped 30-subcarrier CSI amplitude recording. Amplitudes are linear magnitudes,
/// one row per packet. Phases, when present, are carried through IO but unused downstream.
struct CsiTrace {
  double sample_rate_hz = 0.0;
  VectorXd timestamps;
  MatrixXd amplitudes;
  std::optional<MatrixXd> phases;
  std::map<std::string, std::string> meta;

  Eigen::Index samples() const { return timestamps.size(); }
  double duration_s() const { return samples() > 1 ? timestamps(samples() - 1) - timestamps(0) : 0.0; }

  /// Bitwise equality of every field.
  bool operator==(const CsiTrace& other) const;
};

enum class ViolationKind {
  InvalidSampleRate,
  RowCountMismatch,
  WrongColumnCount,
  PhaseShapeMismatch,
  NonMonotoneTimestamps,
  SampleRateMismatch,
  NonFinite,
  NegativeAmplitude,
};

std::string_view to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  long row = -1;  // 1-based data row, -1 when not row-specific
  long col = -1;  // 1-based subcarrier / column, -1 when not column-specific
  std::string detail;
};

/// Empty iff every CsiTrace invariant holds.
std::vector<Violation> validate_trace(const CsiTrace& trace);

CsiTrace read_trace_csv(std::istream& in);
void write_trace_csv(const CsiTrace& trace, std::ostream& out);

// Compact little-endian layout:
//   "WIEC1" | u32 N | f64 sample_rate | f64 t[N] | f64 amp[N*30] | u8 has_phase | f64 phase[N*30]?
// Matrices are stored row by row (sample-major). Metadata is not carried.
CsiTrace read_trace_binary(std::istream& in);
void write_trace_binary(const CsiTrace& trace, std::ostream& out);

/// Loads CSV or binary, sniffing the binary magic.
CsiTrace load_trace(const std::filesystem::path& path);
void save_trace(const CsiTrace& trace, const std::filesystem::path& path);

/// Shortest decimal text that parses back to the identical double.
std::string format_double(double value);

}  // namespace wieat
