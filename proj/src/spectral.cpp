#include "wieat/spectral.hpp"

#include "wieat/error.hpp"

#include <unsupported/Eigen/FFT>

#include <numbers>
#include <vector>

namespace wieat {

Eigen::Index next_pow2(Eigen::Index n) {
  Eigen::Index p = 1;
  while (p < n) p <<= 1;
  return p;
}

VectorXd hann_window(Eigen::Index n) {
  VectorXd w(n);
  if (n == 1) {
    w(0) = 1.0;
    return w;
  }
  for (Eigen::Index m = 0; m < n; ++m) {
    w(m) = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(n - 1));
  }
  return w;
}

SpectrumXcd rfft(const Eigen::Ref<const VectorXd>& x, Eigen::Index nfft) {
  if (nfft < x.size() || nfft < 1) throw Error(ErrorCode::InvalidArgument, "rfft length shorter than input");
  std::vector<double> padded(static_cast<std::size_t>(nfft), 0.0);
  for (Eigen::Index i = 0; i < x.size(); ++i) padded[static_cast<std::size_t>(i)] = x(i);
  std::vector<std::complex<double>> spectrum;
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  fft.fwd(spectrum, padded);
  SpectrumXcd out(nfft / 2 + 1);
  for (Eigen::Index k = 0; k < out.size(); ++k) out(k) = spectrum[static_cast<std::size_t>(k)];
  return out;
}

VectorXd rfft_frequencies(Eigen::Index nfft, double sample_rate_hz) {
  VectorXd f(nfft / 2 + 1);
  for (Eigen::Index k = 0; k < f.size(); ++k) f(k) = static_cast<double>(k) * sample_rate_hz / static_cast<double>(nfft);
  return f;
}

}  // namespace wieat
