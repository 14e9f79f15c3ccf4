#include "wieat/preprocess.hpp"

#include "wieat/parallel.hpp"

#include <complex>
#include <numbers>

namespace wieat {

namespace {

using Complex = std::complex<double>;

struct Prewarped {
  double bandwidth;
  double center_sq;
};

Prewarped prewarp(const FilterSpec& spec, double fs) {
  const double w1 = 2.0 * fs * std::tan(std::numbers::pi * spec.low_hz / fs);
  const double w2 = 2.0 * fs * std::tan(std::numbers::pi * spec.high_hz / fs);
  return {w2 - w1, w1 * w2};
}

Complex section_response(const Eigen::Matrix<double, 1, 6>& s, double omega) {
  const Complex z1 = std::polar(1.0, -omega);
  const Complex z2 = z1 * z1;
  return (s(0) + s(1) * z1 + s(2) * z2) / (s(3) + s(4) * z1 + s(5) * z2);
}

// Initial state of each section for a unit-step steady state at the cascade input.
Eigen::Matrix<double, Eigen::Dynamic, 2> steady_state(const SosMatrix& sos) {
  Eigen::Matrix<double, Eigen::Dynamic, 2> zi(sos.rows(), 2);
  double level = 1.0;
  for (Eigen::Index k = 0; k < sos.rows(); ++k) {
    const auto s = sos.row(k);
    const double gain = (s(0) + s(1) + s(2)) / (s(3) + s(4) + s(5));
    const double y = gain * level;
    zi(k, 0) = y - s(0) * level;
    zi(k, 1) = s(2) * level - s(5) * y;
    level = y;
  }
  return zi;
}

VectorXd run_cascade(const SosMatrix& sos, const VectorXd& x, Eigen::Matrix<double, Eigen::Dynamic, 2> state) {
  VectorXd y = x;
  for (Eigen::Index k = 0; k < sos.rows(); ++k) {
    const double b0 = sos(k, 0), b1 = sos(k, 1), b2 = sos(k, 2);
    const double a1 = sos(k, 4), a2 = sos(k, 5);
    double z1 = state(k, 0);
    double z2 = state(k, 1);
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double in = y(i);
      const double out = b0 * in + z1;
      z1 = b1 * in - a1 * out + z2;
      z2 = b2 * in - a2 * out;
      y(i) = out;
    }
  }
  return y;
}

}  // namespace

void FilterSpec::validate(double sample_rate_hz) const {
  if (!(sample_rate_hz > 0.0)) throw Error(ErrorCode::InvalidBand, "sample rate must be positive");
  if (!(low_hz > 0.0 && low_hz < high_hz && high_hz < sample_rate_hz / 2.0)) {
    throw Error(ErrorCode::InvalidBand, "band must satisfy 0 < low < high < fs/2");
  }
  if (order < 1) throw Error(ErrorCode::InvalidBand, "filter order must be >= 1");
}

SosMatrix butterworth_bandpass(const FilterSpec& spec, double sample_rate_hz) {
  spec.validate(sample_rate_hz);
  const double fs2 = 2.0 * sample_rate_hz;
  const auto [bw, w0sq] = prewarp(spec, sample_rate_hz);
  const int n = spec.order;

  std::vector<Complex> upper;  // digital poles with positive imaginary part
  std::vector<double> real_poles;
  for (int k = 0; k < n; ++k) {
    const Complex proto = std::polar(1.0, std::numbers::pi * (2.0 * k + n + 1) / (2.0 * n));
    const Complex half = proto * bw / 2.0;
    const Complex root = std::sqrt(half * half - w0sq);
    for (const Complex s : {half + root, half - root}) {
      const Complex z = (fs2 + s) / (fs2 - s);
      if (std::abs(z.imag()) <= 1e-12 * std::abs(z)) {
        real_poles.push_back(z.real());
      } else if (z.imag() > 0.0) {
        upper.push_back(z);
      }
    }
  }
  std::sort(real_poles.begin(), real_poles.end());

  SosMatrix sos(n, 6);
  Eigen::Index row = 0;
  for (const Complex& z : upper) sos.row(row++) << 1.0, 0.0, -1.0, 1.0, -2.0 * z.real(), std::norm(z);
  for (std::size_t i = 0; i + 1 < real_poles.size(); i += 2) {
    const double r1 = real_poles[i], r2 = real_poles[i + 1];
    sos.row(row++) << 1.0, 0.0, -1.0, 1.0, -(r1 + r2), r1 * r2;
  }
  if (row != n) throw Error(ErrorCode::InvalidBand, "unexpected pole configuration in band-pass design");

  // Unit gain at the (warped) band centre, which is where the analog prototype has |H| = 1.
  const double center_omega = 2.0 * std::atan(std::sqrt(w0sq) / fs2);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double g = std::abs(section_response(sos.row(k), center_omega));
    sos.block(k, 0, 1, 3) /= g;
  }
  return sos;
}

double sos_magnitude(const SosMatrix& sos, double freq_hz, double sample_rate_hz) {
  const double omega = 2.0 * std::numbers::pi * freq_hz / sample_rate_hz;
  Complex h = 1.0;
  for (Eigen::Index k = 0; k < sos.rows(); ++k) h *= section_response(sos.row(k), omega);
  return std::abs(h);
}

double butterworth_bandpass_magnitude(const FilterSpec& spec, double freq_hz, double sample_rate_hz) {
  const auto [bw, w0sq] = prewarp(spec, sample_rate_hz);
  const double w = 2.0 * sample_rate_hz * std::tan(std::numbers::pi * freq_hz / sample_rate_hz);
  if (w == 0.0) return 0.0;
  const double x = (w * w - w0sq) / (w * bw);
  return 1.0 / std::sqrt(1.0 + std::pow(x * x, spec.order));
}

VectorXd sosfilt(const SosMatrix& sos, const Eigen::Ref<const VectorXd>& x) {
  return run_cascade(sos, x, Eigen::Matrix<double, Eigen::Dynamic, 2>::Zero(sos.rows(), 2));
}

VectorXd sosfiltfilt(const SosMatrix& sos, const Eigen::Ref<const VectorXd>& x, Eigen::Index padlen) {
  const Eigen::Index n = x.size();
  if (n == 0) return VectorXd(0);
  padlen = std::clamp<Eigen::Index>(padlen, 0, n - 1);
  VectorXd ext(n + 2 * padlen);
  for (Eigen::Index i = 0; i < padlen; ++i) {
    ext(i) = 2.0 * x(0) - x(padlen - i);
    ext(n + padlen + i) = 2.0 * x(n - 1) - x(n - 2 - i);
  }
  ext.segment(padlen, n) = x;

  const auto zi = steady_state(sos);
  VectorXd forward = run_cascade(sos, ext, zi * ext(0));
  VectorXd reversed = forward.reverse();
  VectorXd backward = run_cascade(sos, reversed, zi * reversed(0));
  return backward.reverse().segment(padlen, n);
}

VectorXd bandpass(const Eigen::Ref<const VectorXd>& series, const FilterSpec& spec, double sample_rate_hz) {
  const SosMatrix sos = butterworth_bandpass(spec, sample_rate_hz);
  if (series.size() == 0) return VectorXd(0);
  if (spec.zero_phase) {
    const auto padlen = static_cast<Eigen::Index>(std::ceil(3.0 * sample_rate_hz / spec.low_hz));
    return sosfiltfilt(sos, series, padlen);
  }
  return run_cascade(sos, series, steady_state(sos) * series(0));
}

VectorXd notch(const Eigen::Ref<const VectorXd>& series, const FilterSpec& band, double sample_rate_hz) {
  FilterSpec zero_phase = band;
  zero_phase.zero_phase = true;
  return series - bandpass(series, zero_phase, sample_rate_hz);
}

MatrixXd remove_outliers_columns(const MatrixXd& amplitudes, Eigen::Index window, double k, int threads) {
  MatrixXd out(amplitudes.rows(), amplitudes.cols());
  parallel_for(static_cast<std::size_t>(amplitudes.cols()), threads, [&](std::size_t j) {
    const auto col = static_cast<Eigen::Index>(j);
    out.col(col) = remove_outliers(amplitudes.col(col), window, k);
  });
  return out;
}

MatrixXd bandpass_columns(const MatrixXd& amplitudes, const FilterSpec& spec, double sample_rate_hz, int threads) {
  spec.validate(sample_rate_hz);
  MatrixXd out(amplitudes.rows(), amplitudes.cols());
  parallel_for(static_cast<std::size_t>(amplitudes.cols()), threads, [&](std::size_t j) {
    const auto col = static_cast<Eigen::Index>(j);
    out.col(col) = bandpass(amplitudes.col(col), spec, sample_rate_hz);
  });
  return out;
}

}  // namespace wieat
