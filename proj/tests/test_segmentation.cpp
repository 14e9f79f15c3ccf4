#include "doctest.h"
#include "support.hpp"

#include "wieat/segmentation.hpp"
#include "wieat/synth.hpp"

using namespace wieat;

TEST_CASE("hann window") {
  const VectorXd w = hann_window(5);
  CHECK(w(0) == 0.0);
  CHECK(w(2) == doctest::Approx(1.0));
  CHECK(w(1) == doctest::Approx(w(3)));
  CHECK(hann_window(1)(0) == 1.0);
}

TEST_CASE("rfft matches a direct DFT") {
  std::mt19937_64 rng(4);
  for (Eigen::Index n : {1, 7, 16, 100, 125}) {
    const VectorXd x = testing::random_vector(rng, n);
    const Eigen::Index nfft = n + static_cast<Eigen::Index>(rng() % 9);
    CHECK(testing::max_rel_error(rfft(x, nfft).cwiseAbs2(), testing::dft_power(x, nfft)) < 1e-9);
  }
  CHECK(next_pow2(1) == 1);
  CHECK(next_pow2(513) == 1024);
}

TEST_CASE("spectrogram, cpsd and ste against brute force") {
  std::mt19937_64 rng(8);
  for (int k = 0; k < 10; ++k) {
    const double fs = 40.0 + static_cast<double>(rng() % 60);
    const VectorXd x = testing::random_vector(rng, 200 + static_cast<Eigen::Index>(rng() % 300));
    const Spectrogram s = spectrogram(x, fs, 0.5, 0.1);
    const VectorXd c = cumulative_psd(s);
    CHECK(testing::max_rel_error(c, testing::brute_cpsd(x, s.window_samples, s.hop_samples)) < 1e-9);
    const Eigen::Index w = 1 + static_cast<Eigen::Index>(rng() % std::min<Eigen::Index>(15, c.size()));
    CHECK(testing::max_rel_error(short_time_energy(c, w), testing::brute_ste(c, w)) < 1e-9);
  }
}

TEST_CASE("ste window bounds") {
  CHECK_THROWS_AS(short_time_energy(VectorXd::Ones(4), 0), Error);
  CHECK_THROWS_AS(short_time_energy(VectorXd::Ones(4), 5), Error);
  // a single unit impulse spreads as the squared window
  VectorXd c = VectorXd::Zero(9);
  c(4) = 1.0;
  const VectorXd e = short_time_energy(c, 5);
  for (Eigen::Index k = 0; k < 9; ++k) {
    const Eigen::Index lag = k - 4 + 2;
    const double w = lag >= 0 && lag < 5 ? testing::hann(lag, 5) : 0.0;
    CHECK(e(k) == doctest::Approx(w * w));
  }
}

TEST_CASE("segment_activities on a hand-built energy curve") {
  VectorXd ste = VectorXd::Zero(40);
  ste.segment(10, 8).setConstant(10.0);
  ste.segment(25, 2).setConstant(10.0);  // too short once crossing-interpolated
  SegmentParams p;
  p.min_len_s = 1.0;
  const auto segs = segment_activities(ste, p, 0.25, 100.0, 1000);
  REQUIRE(segs.size() == 1);
  // crossings interpolate to 9 + 0.01 and 17 + 0.99 bins
  CHECK(segs[0].start_s == doctest::Approx(9.01 * 0.25));
  CHECK(segs[0].end_s == doctest::Approx(17.99 * 0.25));
  CHECK(segs[0].start_idx == std::llround(segs[0].start_s * 100.0));

  // gaps shorter than min_gap merge
  VectorXd two = VectorXd::Zero(40);
  two.segment(5, 6).setConstant(1.0);
  two.segment(12, 6).setConstant(1.0);
  CHECK(segment_activities(two, p, 0.25, 100.0, 1000).size() == 1);
  p.min_gap_s = 0.1;
  CHECK(segment_activities(two, p, 0.25, 100.0, 1000).size() == 2);
}

TEST_CASE("flat trace yields no segments") {
  CsiTrace t;
  t.sample_rate_hz = 500.0;
  t.timestamps = VectorXd::LinSpaced(5000, 0.0, 4999.0 / 500.0);
  t.amplitudes = MatrixXd::Constant(5000, 30, 1.0);
  CHECK(segment_trace(t, {}).segments.empty());
}

TEST_CASE("a delivery is found near its true span") {
  const auto bundle = generate(meal_scenario(std::vector<Utensil>{Utensil::Spoon, Utensil::Fork}, 20.0, 3));
  const auto r = segment_trace(bundle.trace, {});
  std::vector<ActivitySegment> truth;
  for (const auto& s : bundle.ground_truth->segments) {
    if (s.kind == EventKind::Delivery) truth.push_back(s.segment);
  }
  REQUIRE(r.segments.size() == truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    CHECK(std::abs(r.segments[i].start_s - truth[i].start_s) <= 0.5);
    CHECK(std::abs(r.segments[i].end_s - truth[i].end_s) <= 0.5);
  }
}
