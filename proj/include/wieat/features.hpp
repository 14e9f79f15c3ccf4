#pragma once

#include "wieat/csi_io.hpp"
#include "wieat/types.hpp"

#include <array>
#include <string_view>

namespace wieat {

enum class Feature : int {
  Mean,
  Std,
  Rms,
  AverageRectified,
  P25,
  P75,
  Iqr,
  Skewness,
  Kurtosis,
  SpectralEnergy,
  SpectralEntropy,
  DominantFrequency,
  DominantPower,
  DominantPhase,
};

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames{
    "mean", "std", "rms", "arv", "p25", "p75", "iqr", "skewness", "kurtosis",
    "spectral_energy", "spectral_entropy", "dominant_freq_hz", "dominant_power", "dominant_phase"};

/// Shortest accepted segment for feature extraction.
inline constexpr double kMinFeatureSegmentS = 0.5;

/// Time- and frequency-domain statistics of one amplitude series.
///
/// Time domain: mean, population std, RMS, mean |x - mean|, 25th/75th percentiles, IQR,
/// skewness and excess kurtosis (both 0 when std is 0).
/// Frequency domain, from the mean-removed series zero-padded to next_pow2(4n):
/// P_k = |X_k|^2 / n over the one-sided bins, energy = sum P_k, Shannon entropy of P / energy
/// (0 for a silent series), and the frequency, power and phase of the largest bin (lowest index on ties).
FeatureVector series_features(const Eigen::Ref<const VectorXd>& series, double sample_rate_hz);

using FeatureMatrix = Eigen::Matrix<double, kSubcarriers, kFeatureCount>;

/// Per-subcarrier features over the segment (row i = subcarrier i + 1).
FeatureMatrix extract_features(const CsiTrace& trace, const ActivitySegment& seg, int threads = 1);

/// Features of the subcarrier-mean amplitude over the segment.
FeatureVector segment_feature_vector(const CsiTrace& trace, const ActivitySegment& seg);

}  // namespace wieat
