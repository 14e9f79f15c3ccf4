#include "doctest.h"
#include "support.hpp"

#include "wieat/features.hpp"
#include "wieat/stats.hpp"

#include <numbers>

using namespace wieat;

namespace {

double f(const FeatureVector& v, Feature which) { return v(static_cast<int>(which)); }

CsiTrace sine_trace(double freq, double seconds) {
  const double fs = 500.0;
  const auto n = static_cast<Eigen::Index>(seconds * fs);
  CsiTrace t;
  t.sample_rate_hz = fs;
  t.timestamps = VectorXd::LinSpaced(n, 0.0, static_cast<double>(n - 1) / fs);
  t.amplitudes.resize(n, 30);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < 30; ++j) t.amplitudes(i, j) = 2.0 + (1.0 + 0.01 * j) * std::sin(2 * std::numbers::pi * freq * i / fs);
  }
  return t;
}

}  // namespace

TEST_CASE("time-domain features follow their formulas") {
  std::mt19937_64 rng(6);
  const VectorXd x = testing::random_vector(rng, 301, 0.0, 3.0);
  const FeatureVector v = series_features(x, 100.0);
  const double n = 301.0;
  const double mean = x.mean();
  const VectorXd d = x.array() - mean;
  const double sd = std::sqrt(d.squaredNorm() / n);
  CHECK(f(v, Feature::Mean) == doctest::Approx(mean));
  CHECK(f(v, Feature::Std) == doctest::Approx(sd));
  CHECK(f(v, Feature::Rms) == doctest::Approx(std::sqrt(x.squaredNorm() / n)));
  CHECK(f(v, Feature::AverageRectified) == doctest::Approx(d.cwiseAbs().sum() / n));
  CHECK(f(v, Feature::P25) == doctest::Approx(quantile(x, 0.25)));
  CHECK(f(v, Feature::Iqr) == doctest::Approx(quantile(x, 0.75) - quantile(x, 0.25)));
  CHECK(f(v, Feature::Skewness) == doctest::Approx(d.array().cube().sum() / n / std::pow(sd, 3)));
  CHECK(f(v, Feature::Kurtosis) == doctest::Approx(d.array().pow(4).sum() / n / std::pow(sd, 4) - 3.0));

  // spectral block against a direct DFT of the centred series
  const Eigen::Index nfft = next_pow2(4 * 301);
  const VectorXd p = testing::dft_power(d, nfft) / n;
  CHECK(f(v, Feature::SpectralEnergy) == doctest::Approx(p.sum()));
  const VectorXd q = p / p.sum();
  double h = 0.0;
  for (Eigen::Index k = 0; k < q.size(); ++k) {
    if (q(k) > 0) h -= q(k) * std::log(q(k));
  }
  CHECK(f(v, Feature::SpectralEntropy) == doctest::Approx(h));
  Eigen::Index best = 0;
  p.maxCoeff(&best);
  CHECK(f(v, Feature::DominantFrequency) == doctest::Approx(best * 100.0 / nfft));
  CHECK(f(v, Feature::DominantPower) == doctest::Approx(p(best)));
}

TEST_CASE("constant series") {
  const FeatureVector v = series_features(VectorXd::Constant(64, 4.0), 50.0);
  CHECK(f(v, Feature::Std) == 0.0);
  CHECK(f(v, Feature::Skewness) == 0.0);
  CHECK(f(v, Feature::Kurtosis) == 0.0);
  CHECK(f(v, Feature::SpectralEnergy) == 0.0);
  CHECK(f(v, Feature::SpectralEntropy) == 0.0);
  CHECK(f(v, Feature::DominantPhase) == 0.0);
  CHECK(f(v, Feature::Mean) == 4.0);
  CHECK(f(v, Feature::Rms) == 4.0);
  CHECK(f(v, Feature::Iqr) == 0.0);
  CHECK(f(v, Feature::DominantFrequency) == 0.0);
}

TEST_CASE("sine: rms and dominant frequency") {
  const CsiTrace t = sine_trace(2.0, 4.0);
  const ActivitySegment seg{0, t.samples(), 0.0, 4.0};
  const FeatureMatrix m = extract_features(t, seg, 2);
  CHECK(m(0, static_cast<int>(Feature::Std)) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-3));
  for (int j = 0; j < 30; ++j) CHECK(m(j, static_cast<int>(Feature::DominantFrequency)) == doctest::Approx(2.0).epsilon(0.03));
  CHECK(m == extract_features(t, seg, 1));
  const FeatureVector mean = segment_feature_vector(t, seg);
  CHECK(f(mean, Feature::Mean) == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("segment checks") {
  const CsiTrace t = sine_trace(2.0, 2.0);
  CHECK_THROWS_AS(extract_features(t, {0, 100, 0.0, 0.2}), Error);
  try {
    extract_features(t, {0, 100, 0.0, 0.2});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SegmentTooShort);
  }
  CHECK_THROWS_AS(extract_features(t, {500, 2000, 1.0, 4.0}), Error);
}
