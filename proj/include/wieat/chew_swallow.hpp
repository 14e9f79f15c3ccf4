#pragma once

#include "wieat/csi_io.hpp"
#include "wieat/preprocess.hpp"
#include "wieat/types.hpp"

#include <optional>
#include <vector>

namespace wieat {

/// Single minute-motion series assembled window by window from the most active of the
/// subcarriers whose window mean is closest to the cross-subcarrier mean.
struct ReconstructedSeries {
  VectorXd values;
  std::vector<int> source_subcarrier;  // 1-based, one per sample
  double sample_rate_hz = 0.0;
};

struct ReconstructParams {
  double window_s = 0.25;
  int candidates = 10;
};

/// `amplitudes` holds the interval rows only (already band-passed). Windows tile the interval
/// without overlap; each window after the first is offset so that the step from the previous
/// output sample equals the chosen subcarrier's own step across the boundary.
ReconstructedSeries reconstruct(const MatrixXd& amplitudes, double sample_rate_hz, const ReconstructParams& params = {});
ReconstructedSeries reconstruct(const CsiTrace& trace, const ActivitySegment& interval, const ReconstructParams& params = {});

struct ApsdSpectrum {
  VectorXd freqs_hz;
  VectorXd apsd_db;
};

inline constexpr double kApsdFloorDb = -300.0;
inline constexpr double kMinApsdIntervalS = 2.0;

/// 10 log10 of sum_i |FFT(c_i - mean c_i)|^2 / N over the columns, nfft = next_pow2(N),
/// floored at -300 dB.
ApsdSpectrum apsd(const MatrixXd& amplitudes, double sample_rate_hz);
ApsdSpectrum apsd(const CsiTrace& trace, const ActivitySegment& interval);

struct ChewRateParams {
  double low_hz = 0.8;
  double high_hz = 3.0;
  double prominence_db = 3.0;
};

/// Frequency of the largest in-band bin; absent if it is less than prominence_db above the in-band median.
std::optional<double> estimate_chew_rate(const ApsdSpectrum& spectrum, const ChewRateParams& params = {});

struct PeakPattern {
  Eigen::Index peak_idx = 0;
  Eigen::Index valley_idx = 0;
};

/// Strict local maxima; a flat top counts once, at its leftmost sample, if it is followed by a drop.
std::vector<Eigen::Index> local_maxima(const Eigen::Ref<const VectorXd>& values);

/// Drop of each local maximum: its value minus the lowest sample before the next local maximum.
VectorXd peak_drops(const Eigen::Ref<const VectorXd>& values, const std::vector<Eigen::Index>& maxima);

/// gamma = factor * quantile(peak_drops, q); 0 when there are no maxima.
double default_gamma(const Eigen::Ref<const VectorXd>& values, double factor = 0.3, double q = 0.9);

/// Local maxima whose drop is >= gamma, thinned greedily (largest drop first, earlier peak on ties)
/// to a minimum spacing of beta_s, each paired with the lowest sample before the next kept peak.
std::vector<PeakPattern> detect_peaks(const ReconstructedSeries& series, double beta_s, double gamma);

struct ChewSwallowReport {
  int chew_count = 0;
  int swallow_count = 0;
  std::optional<double> chew_rate_hz;
  std::vector<double> chew_times_s;
  std::vector<double> swallow_times_s;
  ActivitySegment interval;
  double mean_range = 0.0;     // mean peak-to-valley range over the patterns
  double mean_interval_s = 0.0;  // mean peak-to-valley time over the patterns
};

/// Patterns with range below the interval mean and peak-to-valley time above the interval mean are
/// swallows, the rest chews. Event times are peak times offset by interval.start_s.
ChewSwallowReport count_chews_swallows(const ReconstructedSeries& series, const std::vector<PeakPattern>& peaks,
                                       const ActivitySegment& interval);

struct ChewConfig {
  FilterSpec band{0.8, 3.0, 4, true};
  double smooth_s = 0.03;
  ReconstructParams reconstruct;
  ChewRateParams rate;
  double beta_factor = 0.7;
  double beta_fallback_s = 0.5;
  double gamma_factor = 0.3;
  double gamma_quantile = 0.9;

  void validate(double sample_rate_hz) const;
};

struct ChewAnalysis {
  ChewSwallowReport report;
  ReconstructedSeries series;
  ApsdSpectrum spectrum;
  double beta_s = 0.0;
  double gamma = 0.0;
};

/// Band-pass, smooth, reconstruct, APSD rate estimate, peak detection and counting over one interval.
ChewAnalysis analyze_interval(const CsiTrace& trace, const ActivitySegment& interval, const ChewConfig& config = {});

}  // namespace wieat
