#include "wieat/csi_io.hpp"

#include "wieat/error.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

namespace wieat {

namespace {

constexpr std::string_view kMagic = "WIEC1";
constexpr std::string_view kRateKey = "sample_rate_hz=";
constexpr std::string_view kMetaPrefix = "meta.";

bool bitwise_equal(const MatrixXd& a, const MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return a.size() == 0 || std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::optional<double> parse_double(std::string_view text) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (text.empty() || ec != std::errc{} || ptr != last) return std::nullopt;
  return value;
}

std::string column_name(char prefix, int index) {
  std::string name(1, prefix);
  if (index < 10) name += '0';
  name += std::to_string(index);
  return name;
}

void check_header(const std::vector<std::string_view>& cells, long line_no, bool& has_phase) {
  const auto amp_cols = static_cast<std::size_t>(kSubcarriers);
  if (cells.size() != 1 + amp_cols && cells.size() != 1 + 2 * amp_cols) {
    throw Error(ErrorCode::WrongColumnCount,
                "header has " + std::to_string(cells.size()) + " columns, expected 31 or 61", line_no);
  }
  has_phase = cells.size() == 1 + 2 * amp_cols;
  if (cells[0] != "t") throw Error(ErrorCode::MalformedHeader, "first header column must be 't'", line_no, 1);
  for (std::size_t j = 1; j < cells.size(); ++j) {
    const bool phase_col = j > amp_cols;
    const int index = static_cast<int>(phase_col ? j - amp_cols : j);
    const auto expected = column_name(phase_col ? 'p' : 'a', index);
    if (cells[j] != expected) {
      throw Error(ErrorCode::MalformedHeader,
                  "header column " + std::to_string(j + 1) + " is '" + std::string(cells[j]) + "', expected '" +
                      expected + "'",
                  line_no, static_cast<long>(j + 1));
    }
  }
}

void raise_first_violation(const std::vector<Violation>& violations) {
  if (violations.empty()) return;
  const auto& v = violations.front();
  ErrorCode code = ErrorCode::MalformedHeader;
  switch (v.kind) {
    case ViolationKind::NonMonotoneTimestamps: code = ErrorCode::NonMonotoneTimestamps; break;
    case ViolationKind::NonFinite:
    case ViolationKind::NegativeAmplitude: code = ErrorCode::NonFiniteValue; break;
    case ViolationKind::WrongColumnCount:
    case ViolationKind::PhaseShapeMismatch:
    case ViolationKind::RowCountMismatch: code = ErrorCode::WrongColumnCount; break;
    case ViolationKind::InvalidSampleRate:
    case ViolationKind::SampleRateMismatch: code = ErrorCode::MalformedHeader; break;
  }
  throw Error(code, std::string(to_string(v.kind)) + ": " + v.detail, v.row >= 0 ? std::optional<long>(v.row) : std::nullopt,
              v.col >= 0 ? std::optional<long>(v.col) : std::nullopt);
}

template <typename T>
void put_le(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes{};
  if constexpr (std::is_same_v<T, double>) {
    const auto bits = std::bit_cast<std::uint64_t>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xFFu);
  } else {
    for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFFu);
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

template <typename T>
T get_le(std::istream& in, const char* what) {
  std::array<unsigned char, sizeof(T)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
    throw Error(ErrorCode::MalformedHeader, std::string("binary trace truncated while reading ") + what);
  }
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  if constexpr (std::is_same_v<T, double>) {
    return std::bit_cast<double>(bits);
  } else {
    return static_cast<T>(bits);
  }
}

}  // namespace

bool CsiTrace::operator==(const CsiTrace& other) const {
  if (std::bit_cast<std::uint64_t>(sample_rate_hz) != std::bit_cast<std::uint64_t>(other.sample_rate_hz)) return false;
  if (meta != other.meta) return false;
  if (!bitwise_equal(timestamps, other.timestamps) || !bitwise_equal(amplitudes, other.amplitudes)) return false;
  if (phases.has_value() != other.phases.has_value()) return false;
  return !phases || bitwise_equal(*phases, *other.phases);
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::InvalidSampleRate: return "InvalidSampleRate";
    case ViolationKind::RowCountMismatch: return "RowCountMismatch";
    case ViolationKind::WrongColumnCount: return "WrongColumnCount";
    case ViolationKind::PhaseShapeMismatch: return "PhaseShapeMismatch";
    case ViolationKind::NonMonotoneTimestamps: return "NonMonotoneTimestamps";
    case ViolationKind::SampleRateMismatch: return "SampleRateMismatch";
    case ViolationKind::NonFinite: return "NonFinite";
    case ViolationKind::NegativeAmplitude: return "NegativeAmplitude";
  }
  return "Unknown";
}

std::vector<Violation> validate_trace(const CsiTrace& trace) {
  std::vector<Violation> out;
  const auto n = trace.timestamps.size();
  if (!(std::isfinite(trace.sample_rate_hz) && trace.sample_rate_hz > 0.0)) {
    out.push_back({ViolationKind::InvalidSampleRate, -1, -1, "sample rate must be positive and finite"});
  }
  if (trace.amplitudes.cols() != kSubcarriers) {
    out.push_back({ViolationKind::WrongColumnCount, -1, static_cast<long>(trace.amplitudes.cols()),
                   "amplitude matrix has " + std::to_string(trace.amplitudes.cols()) + " columns"});
  }
  if (trace.amplitudes.rows() != n) {
    out.push_back({ViolationKind::RowCountMismatch, -1, -1,
                   std::to_string(trace.amplitudes.rows()) + " amplitude rows vs " + std::to_string(n) + " timestamps"});
  }
  if (trace.phases && (trace.phases->rows() != trace.amplitudes.rows() || trace.phases->cols() != trace.amplitudes.cols())) {
    out.push_back({ViolationKind::PhaseShapeMismatch, -1, -1, "phase matrix shape differs from amplitudes"});
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(trace.timestamps(i))) {
      out.push_back({ViolationKind::NonFinite, static_cast<long>(i + 1), 0, "non-finite timestamp"});
    } else if (i > 0 && !(trace.timestamps(i) > trace.timestamps(i - 1))) {
      out.push_back({ViolationKind::NonMonotoneTimestamps, static_cast<long>(i + 1), -1,
                     "timestamp does not exceed its predecessor"});
    }
  }
  for (Eigen::Index i = 0; i < trace.amplitudes.rows(); ++i) {
    for (Eigen::Index j = 0; j < trace.amplitudes.cols(); ++j) {
      const double v = trace.amplitudes(i, j);
      if (!std::isfinite(v)) {
        out.push_back({ViolationKind::NonFinite, static_cast<long>(i + 1), static_cast<long>(j + 1), "non-finite amplitude"});
      } else if (v < 0.0) {
        out.push_back({ViolationKind::NegativeAmplitude, static_cast<long>(i + 1), static_cast<long>(j + 1), "negative amplitude"});
      }
    }
  }
  if (trace.phases) {
    for (Eigen::Index i = 0; i < trace.phases->rows(); ++i) {
      for (Eigen::Index j = 0; j < trace.phases->cols(); ++j) {
        if (!std::isfinite((*trace.phases)(i, j))) {
          out.push_back({ViolationKind::NonFinite, static_cast<long>(i + 1), static_cast<long>(kSubcarriers + j + 1),
                         "non-finite phase"});
        }
      }
    }
  }
  if (n >= 2 && std::isfinite(trace.sample_rate_hz) && trace.sample_rate_hz > 0.0) {
    const double mean_dt = (trace.timestamps(n - 1) - trace.timestamps(0)) / static_cast<double>(n - 1);
    const double nominal = 1.0 / trace.sample_rate_hz;
    if (!(std::abs(mean_dt - nominal) <= 0.1 * nominal)) {
      out.push_back({ViolationKind::SampleRateMismatch, -1, -1,
                     "mean sample interval " + format_double(mean_dt) + " s is not within 10% of 1/sample_rate"});
    }
  }
  return out;
}

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) throw Error(ErrorCode::IoFailure, "failed to format number");
  return std::string(buf.data(), ptr);
}

CsiTrace read_trace_csv(std::istream& in) {
  CsiTrace trace;
  std::optional<double> declared_rate;
  bool header_seen = false;
  bool has_phase = false;
  std::vector<double> times;
  std::vector<double> amps;
  std::vector<double> phases;
  std::string line;
  long line_no = 0;
  long data_row = 0;
  const auto amp_cols = static_cast<std::size_t>(kSubcarriers);

  while (std::getline(in, line)) {
    ++line_no;
    const auto view = trim(line);
    if (view.empty()) continue;
    if (view.front() == '#') {
      if (header_seen) throw Error(ErrorCode::MalformedHeader, "comment line after header", data_row + 1);
      auto body = trim(view.substr(1));
      if (body.starts_with(kRateKey)) {
        const auto rate = parse_double(trim(body.substr(kRateKey.size())));
        if (!rate) throw Error(ErrorCode::MalformedHeader, "unparseable sample_rate_hz comment");
        declared_rate = *rate;
      } else if (body.starts_with(kMetaPrefix)) {
        body.remove_prefix(kMetaPrefix.size());
        const auto eq = body.find('=');
        if (eq == std::string_view::npos || eq == 0) throw Error(ErrorCode::MalformedHeader, "meta comment needs key=value");
        trace.meta[std::string(body.substr(0, eq))] = std::string(body.substr(eq + 1));
      }
      continue;
    }
    const auto cells = split_commas(view);
    if (!header_seen) {
      check_header(cells, 0, has_phase);
      header_seen = true;
      continue;
    }
    ++data_row;
    const std::size_t expected = 1 + amp_cols * (has_phase ? 2 : 1);
    if (cells.size() != expected) {
      throw Error(ErrorCode::WrongColumnCount,
                  "row " + std::to_string(data_row) + " has " + std::to_string(cells.size()) + " columns, expected " +
                      std::to_string(expected),
                  data_row, static_cast<long>(cells.size()));
    }
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const auto value = parse_double(cells[j]);
      const long col = static_cast<long>(j + 1);
      if (!value) {
        throw Error(ErrorCode::NonFiniteValue,
                    "row " + std::to_string(data_row) + " column " + std::to_string(col) + " is not a number", data_row, col);
      }
      if (!std::isfinite(*value)) {
        throw Error(ErrorCode::NonFiniteValue,
                    "row " + std::to_string(data_row) + " column " + std::to_string(col) + " is not finite", data_row, col);
      }
      if (j == 0) {
        if (!times.empty() && !(*value > times.back())) {
          throw Error(ErrorCode::NonMonotoneTimestamps,
                      "row " + std::to_string(data_row) + " timestamp does not increase", data_row, col);
        }
        times.push_back(*value);
      } else if (j <= amp_cols) {
        amps.push_back(*value);
      } else {
        phases.push_back(*value);
      }
    }
  }
  if (in.bad()) throw Error(ErrorCode::IoFailure, "read failure");
  if (!header_seen) throw Error(ErrorCode::MalformedHeader, "missing header row");
  if (times.empty()) throw Error(ErrorCode::MalformedHeader, "trace has no data rows");

  const auto n = static_cast<Eigen::Index>(times.size());
  trace.timestamps = Eigen::Map<const VectorXd>(times.data(), n);
  trace.amplitudes = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      amps.data(), n, kSubcarriers);
  if (has_phase) {
    trace.phases = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        phases.data(), n, kSubcarriers);
  }
  if (declared_rate) {
    trace.sample_rate_hz = *declared_rate;
  } else if (n >= 2) {
    trace.sample_rate_hz = static_cast<double>(n - 1) / (times.back() - times.front());
  } else {
    throw Error(ErrorCode::MalformedHeader, "single-row trace needs a '# sample_rate_hz=' comment");
  }
  raise_first_violation(validate_trace(trace));
  return trace;
}

void write_trace_csv(const CsiTrace& trace, std::ostream& out) {
  for (const auto& [key, value] : trace.meta) {
    if (key.find_first_of("=\n\r") != std::string::npos || value.find_first_of("\n\r") != std::string::npos) {
      throw Error(ErrorCode::InvalidArgument, "meta entries must be single-line and keys must not contain '='");
    }
  }
  out << "# " << kRateKey << format_double(trace.sample_rate_hz) << '\n';
  for (const auto& [key, value] : trace.meta) out << "# " << kMetaPrefix << key << '=' << value << '\n';
  out << 't';
  for (int j = 1; j <= kSubcarriers; ++j) out << ',' << column_name('a', j);
  if (trace.phases) {
    for (int j = 1; j <= kSubcarriers; ++j) out << ',' << column_name('p', j);
  }
  out << '\n';
  std::string row;
  for (Eigen::Index i = 0; i < trace.samples(); ++i) {
    row.clear();
    row += format_double(trace.timestamps(i));
    for (Eigen::Index j = 0; j < trace.amplitudes.cols(); ++j) {
      row += ',';
      row += format_double(trace.amplitudes(i, j));
    }
    if (trace.phases) {
      for (Eigen::Index j = 0; j < trace.phases->cols(); ++j) {
        row += ',';
        row += format_double((*trace.phases)(i, j));
      }
    }
    row += '\n';
    out << row;
  }
  if (!out) throw Error(ErrorCode::IoFailure, "write failure");
}

CsiTrace read_trace_binary(std::istream& in) {
  std::array<char, 5> magic{};
  in.read(magic.data(), magic.size());
  if (in.gcount() != static_cast<std::streamsize>(magic.size()) || std::string_view(magic.data(), magic.size()) != kMagic) {
    throw Error(ErrorCode::MalformedHeader, "missing WIEC1 magic");
  }
  const auto n = static_cast<Eigen::Index>(get_le<std::uint32_t>(in, "sample count"));
  if (n == 0) throw Error(ErrorCode::MalformedHeader, "binary trace has no samples");
  // Reject impossible sizes before allocating when the stream can report its length.
  if (const auto here = in.tellg(); here != std::streampos(-1)) {
    in.seekg(0, std::ios::end);
    const auto end = in.tellg();
    in.seekg(here);
    const auto minimum = static_cast<long double>(8) * (1 + n + n * kSubcarriers) + 1;
    if (end != std::streampos(-1) && static_cast<long double>(end - here) < minimum) {
      throw Error(ErrorCode::MalformedHeader, "binary trace truncated: header declares " + std::to_string(n) + " samples");
    }
  }
  CsiTrace trace;
  trace.sample_rate_hz = get_le<double>(in, "sample rate");
  trace.timestamps.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) trace.timestamps(i) = get_le<double>(in, "timestamps");
  trace.amplitudes.resize(n, kSubcarriers);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < kSubcarriers; ++j) trace.amplitudes(i, j) = get_le<double>(in, "amplitudes");
  }
  const auto has_phase = get_le<std::uint8_t>(in, "phase flag");
  if (has_phase > 1) throw Error(ErrorCode::MalformedHeader, "phase flag must be 0 or 1");
  if (has_phase == 1) {
    MatrixXd phases(n, kSubcarriers);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < kSubcarriers; ++j) phases(i, j) = get_le<double>(in, "phases");
    }
    trace.phases = std::move(phases);
  }
  raise_first_violation(validate_trace(trace));
  return trace;
}

void write_trace_binary(const CsiTrace& trace, std::ostream& out) {
  if (trace.samples() > static_cast<Eigen::Index>(UINT32_MAX)) throw Error(ErrorCode::IoFailure, "trace too long for WIEC1");
  out.write(kMagic.data(), static_cast<std::streamsize>(kMagic.size()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(trace.samples()));
  put_le<double>(out, trace.sample_rate_hz);
  for (Eigen::Index i = 0; i < trace.samples(); ++i) put_le<double>(out, trace.timestamps(i));
  for (Eigen::Index i = 0; i < trace.amplitudes.rows(); ++i) {
    for (Eigen::Index j = 0; j < trace.amplitudes.cols(); ++j) put_le<double>(out, trace.amplitudes(i, j));
  }
  put_le<std::uint8_t>(out, trace.phases ? 1 : 0);
  if (trace.phases) {
    for (Eigen::Index i = 0; i < trace.phases->rows(); ++i) {
      for (Eigen::Index j = 0; j < trace.phases->cols(); ++j) put_le<double>(out, (*trace.phases)(i, j));
    }
  }
  if (!out) throw Error(ErrorCode::IoFailure, "write failure");
}

CsiTrace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::array<char, 5> head{};
  in.read(head.data(), head.size());
  const bool binary = in.gcount() == 5 && std::string_view(head.data(), head.size()) == kMagic;
  in.clear();
  in.seekg(0);
  return binary ? read_trace_binary(in) : read_trace_csv(in);
}

void save_trace(const CsiTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  const auto ext = path.extension().string();
  if (ext == ".bin" || ext == ".wiec") {
    write_trace_binary(trace, out);
  } else {
    write_trace_csv(trace, out);
  }
}

}  // namespace wieat
