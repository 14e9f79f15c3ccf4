#pragma once

#include "wieat/error.hpp"
#include "wieat/types.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace wieat {

struct FilterSpec {
  double low_hz = 0.8;
  double high_hz = 3.0;
  int order = 4;
  bool zero_phase = true;

  /// Throws InvalidBand unless 0 < low < high < fs/2 and order >= 1.
  void validate(double sample_rate_hz) const;
};

/// Second-order sections, one row per section: b0 b1 b2 a0 a1 a2 (a0 == 1).
using SosMatrix = Eigen::Matrix<double, Eigen::Dynamic, 6>;

/// Digital Butterworth band-pass of the given prototype order (2*order poles, `order` sections),
/// designed by bilinear transform with pre-warped band edges.
SosMatrix butterworth_bandpass(const FilterSpec& spec, double sample_rate_hz);

/// |H(e^{jw})| of the cascade at frequency f.
double sos_magnitude(const SosMatrix& sos, double freq_hz, double sample_rate_hz);

/// Closed-form single-pass Butterworth band-pass magnitude at f (bilinear-warped analog prototype).
double butterworth_bandpass_magnitude(const FilterSpec& spec, double freq_hz, double sample_rate_hz);

/// Causal cascade, transposed direct form II, zero initial state.
VectorXd sosfilt(const SosMatrix& sos, const Eigen::Ref<const VectorXd>& x);

/// Forward-backward cascade with odd-extension padding and steady-state initial conditions.
VectorXd sosfiltfilt(const SosMatrix& sos, const Eigen::Ref<const VectorXd>& x, Eigen::Index padlen);

/// Band-pass per `spec`; zero-phase when spec.zero_phase.
VectorXd bandpass(const Eigen::Ref<const VectorXd>& series, const FilterSpec& spec, double sample_rate_hz);

/// Zero-phase complementary notch: x - bandpass_zero_phase(x) over [low, high].
VectorXd notch(const Eigen::Ref<const VectorXd>& series, const FilterSpec& band, double sample_rate_hz);

namespace detail {

template <typename Scalar>
Scalar median_of(std::vector<Scalar>& values) {
  const auto n = values.size();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (n % 2 == 1) return *mid;
  const Scalar upper = *mid;
  const Scalar lower = *std::max_element(values.begin(), mid);
  return (lower + upper) / Scalar(2);
}

// Centered window [i - w/2, i - w/2 + w) clipped to the series.
inline std::pair<Eigen::Index, Eigen::Index> centered_window(Eigen::Index i, Eigen::Index window, Eigen::Index n) {
  const Eigen::Index begin = std::max<Eigen::Index>(0, i - window / 2);
  const Eigen::Index end = std::min<Eigen::Index>(n, i - window / 2 + window);
  return {begin, end};
}

}  // namespace detail

/// Hampel filter: samples farther than k * 1.4826 * MAD from their window median are replaced
/// by that median. Windows are centered and truncated at the edges.
template <typename Derived>
Vector<typename Derived::Scalar> remove_outliers(const Eigen::MatrixBase<Derived>& series, Eigen::Index window,
                                                 typename Derived::Scalar k) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = series.size();
  if (window < 1 || window % 2 == 0) throw Error(ErrorCode::InvalidArgument, "Hampel window must be odd and positive");
  if (window > n) throw Error(ErrorCode::WindowTooLarge, "Hampel window " + std::to_string(window) + " exceeds series length");
  if (!(k > Scalar(0))) throw Error(ErrorCode::InvalidArgument, "Hampel k must be positive");
  Vector<Scalar> out = series;
  std::vector<Scalar> buf;
  std::vector<Scalar> dev;
  const Eigen::Index half = window / 2;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index begin = std::max<Eigen::Index>(0, i - half);
    const Eigen::Index end = std::min<Eigen::Index>(n, i + half + 1);
    buf.clear();
    for (Eigen::Index j = begin; j < end; ++j) buf.push_back(series(j));
    const Scalar med = detail::median_of(buf);
    dev.clear();
    for (Eigen::Index j = begin; j < end; ++j) dev.push_back(std::abs(series(j) - med));
    const Scalar mad = detail::median_of(dev);
    if (std::abs(series(i) - med) > k * Scalar(1.4826) * mad) out(i) = med;
  }
  return out;
}

/// Centered moving mean, edge-truncated.
template <typename Derived>
Vector<typename Derived::Scalar> moving_average(const Eigen::MatrixBase<Derived>& series, Eigen::Index window) {
  using Scalar = typename Derived::Scalar;
  if (window < 1) throw Error(ErrorCode::WindowTooSmall, "moving average window must be >= 1");
  const Eigen::Index n = series.size();
  Vector<Scalar> out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto [begin, end] = detail::centered_window(i, window, n);
    out(i) = series.segment(begin, end - begin).sum() / Scalar(end - begin);
  }
  return out;
}

/// Centered moving unbiased variance, edge-truncated; windows holding a single sample yield 0.
template <typename Derived>
Vector<typename Derived::Scalar> moving_variance(const Eigen::MatrixBase<Derived>& series, Eigen::Index window) {
  using Scalar = typename Derived::Scalar;
  if (window < 2) throw Error(ErrorCode::WindowTooSmall, "moving variance window must be >= 2");
  const Eigen::Index n = series.size();
  Vector<Scalar> out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto [begin, end] = detail::centered_window(i, window, n);
    const Eigen::Index m = end - begin;
    if (m < 2) {
      out(i) = Scalar(0);
      continue;
    }
    const auto seg = series.segment(begin, m);
    const Scalar mean = seg.sum() / Scalar(m);
    out(i) = (seg.array() - mean).square().sum() / Scalar(m - 1);
  }
  return out;
}

/// Outlier removal applied independently to every subcarrier column.
MatrixXd remove_outliers_columns(const MatrixXd& amplitudes, Eigen::Index window, double k, int threads = 1);

/// Band-pass applied independently to every subcarrier column.
MatrixXd bandpass_columns(const MatrixXd& amplitudes, const FilterSpec& spec, double sample_rate_hz, int threads = 1);

}  // namespace wieat
