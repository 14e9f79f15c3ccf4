#pragma once

#include "wieat/csi_io.hpp"
#include "wieat/error.hpp"
#include "wieat/spectral.hpp"
#include "wieat/types.hpp"

#include <vector>

namespace wieat {

/// Short-time power spectrum, one row per frame. power(t, f) = |STFT|^2 with a Hann window.
struct Spectrogram {
  MatrixXd power;  // frames x bins
  VectorXd time_bins_s;
  VectorXd freq_bins_hz;
  double window_s = 0.0;
  double hop_s = 0.0;
  Eigen::Index window_samples = 0;
  Eigen::Index hop_samples = 0;
};

Spectrogram spectrogram(const Eigen::Ref<const VectorXd>& series, double sample_rate_hz, double window_s, double hop_s);

/// Per-frame sum of the spectrogram power over frequency.
VectorXd cumulative_psd(const Spectrogram& spec);

/// STE(n) = sum_i [cpsd(i) * W(n - i)]^2 with W a Hann window of length `window` whose centre sits at lag 0.
template <typename Derived>
Vector<typename Derived::Scalar> short_time_energy(const Eigen::MatrixBase<Derived>& cpsd, Eigen::Index window) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = cpsd.size();
  if (window < 1) throw Error(ErrorCode::WindowTooSmall, "STE window must be >= 1");
  if (window > n) throw Error(ErrorCode::WindowTooLarge, "STE window exceeds CPSD length");
  const Vector<Scalar> w = hann_window(window).template cast<Scalar>();
  const Eigen::Index half = window / 2;
  Vector<Scalar> out = Vector<Scalar>::Zero(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    // lag m = k - i + half must lie in [0, window)
    const Eigen::Index lo = std::max<Eigen::Index>(0, k + half - window + 1);
    const Eigen::Index hi = std::min<Eigen::Index>(n - 1, k + half);
    Scalar acc(0);
    for (Eigen::Index i = lo; i <= hi; ++i) {
      const Scalar v = cpsd(i) * w(k - i + half);
      acc += v * v;
    }
    out(k) = acc;
  }
  return out;
}

struct SegmentParams {
  double eps_rel = 0.01;
  double min_gap_s = 0.5;
  double min_len_s = 0.8;
  // Absolute floor: threshold never drops below floor_factor * quantile(ste, floor_quantile).
  double floor_factor = 4.0;
  double floor_quantile = 0.1;
};

/// Threshold used by segment_activities for this energy curve.
double segmentation_threshold(const Eigen::Ref<const VectorXd>& ste, const SegmentParams& params);

/// Splits an energy curve into activities. Bin k maps to time offset_s + k * hop_s; boundaries sit at
/// the linearly interpolated threshold crossings flanking each retained run. Times are clipped to
/// [0, n_samples / fs] and converted to sample indices.
std::vector<ActivitySegment> segment_activities(const Eigen::Ref<const VectorXd>& ste, const SegmentParams& params,
                                                double hop_s, double sample_rate_hz, Eigen::Index n_samples,
                                                double offset_s = 0.0);

struct SegmentationConfig {
  double variance_window_s = 1.0;
  bool use_moving_std = true;
  double window_s = 1.0;
  double hop_s = 0.25;
  Eigen::Index ste_window = 9;
  SegmentParams params;
};

struct SegmentationResult {
  VectorXd activity_series;  // moving std (or variance) of the subcarrier-mean amplitude
  Spectrogram spec;
  VectorXd cpsd;
  VectorXd ste;
  VectorXd frame_times_s;
  double threshold = 0.0;
  std::vector<ActivitySegment> segments;
};

/// Mean across subcarriers, moving-variance prefilter, spectrogram, CPSD, STE, split.
SegmentationResult segment_trace(const CsiTrace& trace, const SegmentationConfig& config);

}  // namespace wieat
