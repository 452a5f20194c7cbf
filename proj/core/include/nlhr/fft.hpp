// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <span>
#include <vector>

namespace nlhr {

/// Forward DFT, unscaled (FFTW convention).
std::vector<std::complex<double>> fft(std::span<const std::complex<double>> x);

/// Inverse DFT scaled by 1/N, so ifft(fft(x)) == x.
std::vector<std::complex<double>> ifft(std::span<const std::complex<double>> x);

std::vector<std::complex<double>> fft_real(std::span<const double> x);

}  // namespace nlhr
