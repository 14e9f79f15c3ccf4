#pragma once

#include "wieat/types.hpp"

#include <complex>

namespace wieat {

using SpectrumXcd = Eigen::Matrix<std::complex<double>, Eigen::Dynamic, 1>;

Eigen::Index next_pow2(Eigen::Index n);

/// Symmetric Hann window of length n (endpoints are zero for n > 1).
VectorXd hann_window(Eigen::Index n);

/// One-sided DFT (bins 0..nfft/2) of x zero-padded to nfft. Requires nfft >= x.size().
SpectrumXcd rfft(const Eigen::Ref<const VectorXd>& x, Eigen::Index nfft);

/// Bin centre frequencies for a one-sided spectrum of an nfft-point transform.
VectorXd rfft_frequencies(Eigen::Index nfft, double sample_rate_hz);

}  // namespace wieat
