#include "wieat/features.hpp"

#include "wieat/error.hpp"
#include "wieat/parallel.hpp"
#include "wieat/spectral.hpp"
#include "wieat/stats.hpp"

#include <cmath>

namespace wieat {

namespace {

void check_segment(const CsiTrace& trace, const ActivitySegment& seg) {
  if (seg.start_idx < 0 || seg.end_idx > trace.samples() || seg.end_idx <= seg.start_idx) {
    throw Error(ErrorCode::InvalidArgument, "segment outside trace bounds");
  }
  if (static_cast<double>(seg.length()) < kMinFeatureSegmentS * trace.sample_rate_hz) {
    throw Error(ErrorCode::SegmentTooShort, "segment shorter than 0.5 s");
  }
}

}  // namespace

FeatureVector series_features(const Eigen::Ref<const VectorXd>& x, double sample_rate_hz) {
  const Eigen::Index n = x.size();
  if (n < 2) throw Error(ErrorCode::SegmentTooShort, "feature extraction needs at least two samples");
  const double dn = static_cast<double>(n);
  FeatureVector f;
  const double mean = x.mean();
  const VectorXd centered = x.array() - mean;
  const double var = centered.squaredNorm() / dn;
  const double sd = std::sqrt(var);
  f(int(Feature::Mean)) = mean;
  f(int(Feature::Std)) = sd;
  f(int(Feature::Rms)) = std::sqrt(x.squaredNorm() / dn);
  f(int(Feature::AverageRectified)) = centered.cwiseAbs().sum() / dn;
  f(int(Feature::P25)) = quantile(x, 0.25);
  f(int(Feature::P75)) = quantile(x, 0.75);
  f(int(Feature::Iqr)) = f(int(Feature::P75)) - f(int(Feature::P25));
  if (sd > 0.0) {
    f(int(Feature::Skewness)) = centered.array().cube().sum() / dn / (var * sd);
    f(int(Feature::Kurtosis)) = centered.array().square().square().sum() / dn / (var * var) - 3.0;
  } else {
    f(int(Feature::Skewness)) = 0.0;
    f(int(Feature::Kurtosis)) = 0.0;
  }

  const Eigen::Index nfft = next_pow2(4 * n);
  const SpectrumXcd spectrum = rfft(centered, nfft);
  const VectorXd power = spectrum.cwiseAbs2() / dn;
  const double energy = power.sum();
  double entropy = 0.0;
  if (energy > 0.0) {
    for (Eigen::Index k = 0; k < power.size(); ++k) {
      const double p = power(k) / energy;
      if (p > 0.0) entropy -= p * std::log(p);
    }
  }
  Eigen::Index peak = 0;
  for (Eigen::Index k = 1; k < power.size(); ++k) {
    if (power(k) > power(peak)) peak = k;
  }
  f(int(Feature::SpectralEnergy)) = energy;
  f(int(Feature::SpectralEntropy)) = entropy;
  f(int(Feature::DominantFrequency)) = static_cast<double>(peak) * sample_rate_hz / static_cast<double>(nfft);
  f(int(Feature::DominantPower)) = power(peak);
  f(int(Feature::DominantPhase)) = energy > 0.0 ? std::arg(spectrum(peak)) : 0.0;
  return f;
}

FeatureMatrix extract_features(const CsiTrace& trace, const ActivitySegment& seg, int threads) {
  check_segment(trace, seg);
  FeatureMatrix out;
  parallel_for(static_cast<std::size_t>(kSubcarriers), threads, [&](std::size_t j) {
    const auto col = static_cast<Eigen::Index>(j);
    out.row(col) = series_features(trace.amplitudes.col(col).segment(seg.start_idx, seg.length()), trace.sample_rate_hz).transpose();
  });
  return out;
}

FeatureVector segment_feature_vector(const CsiTrace& trace, const ActivitySegment& seg) {
  check_segment(trace, seg);
  const VectorXd mean_series = trace.amplitudes.middleRows(seg.start_idx, seg.length()).rowwise().mean();
  return series_features(mean_series, trace.sample_rate_hz);
}

}  // namespace wieat
