#pragma once

#include "wieat/csi_io.hpp"
#include "wieat/error.hpp"
#include "wieat/spectral.hpp"
#include "wieat/types.hpp"
#include "wieat/utensil.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

namespace wieat::testing {

// Largest elementwise |a - b| / max(|b|, floor * max|b|).
inline double max_rel_error(const VectorXd& a, const VectorXd& b, double floor = 1e-12) {
  if (a.size() != b.size()) return INFINITY;
  if (a.size() == 0) return 0.0;
  const double scale = std::max(b.cwiseAbs().maxCoeff() * floor, 1e-300);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a(i) - b(i)) / std::max(std::abs(b(i)), scale));
  }
  return worst;
}

inline VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

inline CsiTrace random_trace(std::mt19937_64& rng, Eigen::Index n, bool with_phase) {
  std::uniform_real_distribution<double> rate(50.0, 2000.0);
  std::uniform_real_distribution<double> jitter(-0.04, 0.04);
  std::uniform_real_distribution<double> mag(-12.0, 6.0);
  std::uniform_real_distribution<double> phase(-std::numbers::pi, std::numbers::pi);
  CsiTrace t;
  t.sample_rate_hz = rate(rng);
  t.timestamps.resize(n);
  const double dt = 1.0 / t.sample_rate_hz;
  double now = std::uniform_real_distribution<double>(0.0, 1e4)(rng);
  for (Eigen::Index i = 0; i < n; ++i) {
    t.timestamps(i) = now;
    now += dt * (1.0 + jitter(rng));
  }
  t.amplitudes.resize(n, kSubcarriers);
  for (Eigen::Index i = 0; i < t.amplitudes.size(); ++i) {
    // mix of magnitudes, exact zeros and subnormal-adjacent values
    const auto pick = rng() % 16;
    t.amplitudes.data()[i] = pick == 0 ? 0.0 : pick == 1 ? 4.9e-320 : std::pow(10.0, mag(rng));
  }
  if (with_phase) {
    MatrixXd p(n, kSubcarriers);
    for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = phase(rng);
    t.phases = p;
  }
  return t;
}

// O(n * nfft) one-sided DFT power of x zero-padded to nfft.
inline VectorXd dft_power(const VectorXd& x, Eigen::Index nfft) {
  VectorXd out(nfft / 2 + 1);
  for (Eigen::Index k = 0; k < out.size(); ++k) {
    long double re = 0, im = 0;
    for (Eigen::Index m = 0; m < x.size(); ++m) {
      const long double ang = -2.0L * std::numbers::pi_v<long double> * static_cast<long double>((k * m) % nfft) /
                              static_cast<long double>(nfft);
      re += x(m) * std::cos(ang);
      im += x(m) * std::sin(ang);
    }
    out(k) = static_cast<double>(re * re + im * im);
  }
  return out;
}

inline double hann(Eigen::Index m, Eigen::Index n) {
  if (n == 1) return 1.0;
  return 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(n - 1));
}

// Per-frame total power of a Hann-windowed STFT, frames start at multiples of hop.
inline VectorXd brute_cpsd(const VectorXd& x, Eigen::Index win, Eigen::Index hop) {
  const Eigen::Index frames = (x.size() - win) / hop + 1;
  VectorXd out(frames);
  for (Eigen::Index t = 0; t < frames; ++t) {
    VectorXd frame(win);
    for (Eigen::Index m = 0; m < win; ++m) frame(m) = x(t * hop + m) * hann(m, win);
    out(t) = dft_power(frame, win).sum();
  }
  return out;
}

// sum over all i of (c_i * W(n - i))^2, W a Hann window centred on lag 0.
inline VectorXd brute_ste(const VectorXd& c, Eigen::Index window) {
  const Eigen::Index n = c.size();
  const Eigen::Index half = window / 2;
  VectorXd out = VectorXd::Zero(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    long double acc = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index lag = k - i + half;
      if (lag < 0 || lag >= window) continue;
      const long double v = c(i) * hann(lag, window);
      acc += v * v;
    }
    out(k) = static_cast<double>(acc);
  }
  return out;
}

inline std::pair<Eigen::Index, Eigen::Index> brute_window(Eigen::Index i, Eigen::Index w, Eigen::Index n) {
  const Eigen::Index first = i - w / 2;
  return {std::max<Eigen::Index>(first, 0), std::min<Eigen::Index>(first + w, n)};
}

inline VectorXd brute_moving_mean(const VectorXd& x, Eigen::Index w) {
  VectorXd out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const auto [b, e] = brute_window(i, w, x.size());
    long double s = 0;
    for (Eigen::Index j = b; j < e; ++j) s += x(j);
    out(i) = static_cast<double>(s / (e - b));
  }
  return out;
}

inline VectorXd brute_moving_variance(const VectorXd& x, Eigen::Index w) {
  VectorXd out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const auto [b, e] = brute_window(i, w, x.size());
    if (e - b < 2) {
      out(i) = 0.0;
      continue;
    }
    long double s = 0, ss = 0;
    for (Eigen::Index j = b; j < e; ++j) s += x(j);
    const long double mean = s / (e - b);
    for (Eigen::Index j = b; j < e; ++j) ss += (x(j) - mean) * (x(j) - mean);
    out(i) = static_cast<double>(ss / (e - b - 1));
  }
  return out;
}

// Linear accumulated power (before the dB conversion).
inline VectorXd brute_apsd_power(const MatrixXd& x) {
  const Eigen::Index n = x.rows();
  Eigen::Index nfft = 1;
  while (nfft < n) nfft *= 2;
  VectorXd acc = VectorXd::Zero(nfft / 2 + 1);
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const VectorXd c = x.col(j).array() - x.col(j).mean();
    acc += dft_power(c, nfft) / static_cast<double>(n);
  }
  return acc;
}

inline ClassScores brute_fused(const ProbabilityMatrix& p, const SubcarrierWeights& w) {
  ClassScores s;
  for (int c = 0; c < kUtensilCount; ++c) {
    long double acc = 0;
    for (int i = 0; i < kSubcarriers; ++i) acc += static_cast<long double>(p(i, c)) * w(i);
    s(c) = static_cast<double>(acc);
  }
  return s;
}

inline ProbabilityMatrix random_probs(std::mt19937_64& rng) {
  std::gamma_distribution<double> g(0.7, 1.0);
  ProbabilityMatrix p;
  for (int i = 0; i < kSubcarriers; ++i) {
    for (int c = 0; c < kUtensilCount; ++c) p(i, c) = g(rng) + 1e-9;
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

inline SubcarrierWeights random_weights(std::mt19937_64& rng) {
  SubcarrierWeights w;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < kSubcarriers; ++i) w(i) = u(rng);
  return w / w.sum();
}

}  // namespace wieat::testing
