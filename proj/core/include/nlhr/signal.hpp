// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <span>
#include <vector>

namespace nlhr {

double sinc(double x);  // sin(pi x)/(pi x)

/// Symmetric Hann window of length n (endpoints zero for n > 1).
std::vector<double> hanning(int n);

/// Kaiser window of length n with shape parameter beta.
std::vector<double> kaiser(int n, double beta);

std::vector<double> convolve(std::span<const double> a, std::span<const double> b);

/// Kaiser-windowed-sinc taps for a fractional delay of `frac` in [0,1),
/// centered so that tap k corresponds to input sample floor(u) + k - half + 1.
std::vector<double> fractional_delay_taps(double frac, int num_taps, double beta);

/// Linear-phase band-pass FIR (Kaiser design). Frequencies in Hz against
/// sampling rate fs. Returns an odd-length, symmetric tap vector.
std::vector<double> design_bandpass_fir(double f_lo, double f_hi, double fs,
                                        double stop_atten_db, double transition_hz);

/// Zero-phase filtering: forward+backward pass with symmetric reflection
/// padding at both ends. Output has the same length as the input.
std::vector<double> filtfilt_reflect(std::span<const double> x, std::span<const double> taps);

/// Analytic signal via FFT on the even-reflected extension (keeps leakage
/// from non-periodic ends small).
std::vector<std::complex<double>> analytic_signal(std::span<const double> x);

/// 2x upsampling by frequency-domain zero padding (exact for band-limited
/// periodic content). Output has 2N samples at twice the input rate.
std::vector<double> upsample2_fft(std::span<const double> x);

/// 2x upsampling by windowed-sinc midpoint interpolation with reflected
/// edges; y[2n] = x[n], y[2n+1] = x[n + 1/2].
std::vector<double> upsample2_midpoint(std::span<const double> x, int half_taps = 8);
std::vector<std::complex<double>> upsample2_midpoint(std::span<const std::complex<double>> x,
                                                     int half_taps = 8);

/// Mean frequency of a complex series from the phase of the lag-one
/// autocorrelation; fs scales the result to Hz. NaN for an all-zero input.
double lag_one_frequency(std::span<const std::complex<double>> y, double fs);

}  // namespace nlhr
