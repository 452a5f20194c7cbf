// SPDX-License-Identifier: Apache-2.0
#include "nlhr/signal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "nlhr/fft.hpp"

namespace nlhr {

namespace {
constexpr double kPi = std::numbers::pi;

double bessel_i0(double x) { return std::cyl_bessel_i(0.0, std::abs(x)); }

template <typename T>
std::vector<T> midpoint_upsample_impl(std::span<const T> x, int half_taps) {
  const int n = static_cast<int>(x.size());
  if (n == 0) return {};
  if (n == 1) return {x[0], x[0]};
  // taps for a half-sample advance, Kaiser windowed
  const int taps = 2 * half_taps;
  std::vector<double> w(taps);
  double beta = 7.0;
  double denom = bessel_i0(beta);
  for (int k = 0; k < taps; ++k) {
    double t = k - (half_taps - 1) - 0.5;  // offsets ... -1.5, -0.5, 0.5, 1.5 ...
    double u = t / half_taps;
    double win = u <= -1.0 || u >= 1.0 ? 0.0 : bessel_i0(beta * std::sqrt(1.0 - u * u)) / denom;
    w[k] = sinc(t) * win;
  }
  double wsum = 0.0;
  for (double v : w) wsum += v;
  for (double& v : w) v /= wsum;

  auto reflect = [n](int i) {
    while (i < 0 || i >= n) {
      if (i < 0) i = -i - 1;
      if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
  };

  std::vector<T> y(static_cast<std::size_t>(2 * n));
  for (int i = 0; i < n; ++i) {
    y[2 * i] = x[i];
    T acc{};
    for (int k = 0; k < taps; ++k) {
      int j = i + k - (half_taps - 1);  // midpoint between j-1+... see tap offsets
      acc += x[reflect(j)] * w[k];
    }
    y[2 * i + 1] = acc;
  }
  return y;
}
}  // namespace

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  double px = kPi * x;
  return std::sin(px) / px;
}

std::vector<double> hanning(int n) {
  std::vector<double> w(static_cast<std::size_t>(std::max(n, 0)));
  if (n == 1) {
    w[0] = 1.0;
    return w;
  }
  for (int i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * i / (n - 1));
  return w;
}

std::vector<double> kaiser(int n, double beta) {
  std::vector<double> w(static_cast<std::size_t>(std::max(n, 0)));
  if (n == 1) {
    w[0] = 1.0;
    return w;
  }
  const double denom = bessel_i0(beta);
  for (int i = 0; i < n; ++i) {
    double u = 2.0 * i / (n - 1) - 1.0;
    w[i] = bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - u * u))) / denom;
  }
  return w;
}

std::vector<double> convolve(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

std::vector<double> fractional_delay_taps(double frac, int num_taps, double beta) {
  std::vector<double> taps(static_cast<std::size_t>(num_taps));
  const int half = num_taps / 2;
  const double denom = bessel_i0(beta);
  double sum = 0.0;
  for (int k = 0; k < num_taps; ++k) {
    double t = (k - (half - 1)) - frac;  // zero crossing lands on the delayed sample
    double u = t / half;
    double win = (u <= -1.0 || u >= 1.0) ? 0.0 : bessel_i0(beta * std::sqrt(1.0 - u * u)) / denom;
    taps[k] = sinc(t) * win;
    sum += taps[k];
  }
  for (double& v : taps) v /= sum;
  return taps;
}

std::vector<double> design_bandpass_fir(double f_lo, double f_hi, double fs,
                                        double stop_atten_db, double transition_hz) {
  if (!(0.0 < f_lo && f_lo < f_hi && f_hi < 0.5 * fs))
    throw std::invalid_argument("design_bandpass_fir: band edges must satisfy 0 < lo < hi < fs/2");
  const double a = stop_atten_db;
  double beta = 0.0;
  if (a > 50.0)
    beta = 0.1102 * (a - 8.7);
  else if (a >= 21.0)
    beta = 0.5842 * std::pow(a - 21.0, 0.4) + 0.07886 * (a - 21.0);
  const double d_omega = 2.0 * kPi * transition_hz / fs;
  int n = static_cast<int>(std::ceil((a - 7.95) / (2.285 * d_omega))) + 1;
  if (n % 2 == 0) ++n;  // odd length, type-I linear phase
  const int mid = n / 2;
  const double w1 = 2.0 * kPi * f_lo / fs;
  const double w2 = 2.0 * kPi * f_hi / fs;
  std::vector<double> win = kaiser(n, beta);
  std::vector<double> taps(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    int m = i - mid;
    double ideal = m == 0 ? (w2 - w1) / kPi
                          : (std::sin(w2 * m) - std::sin(w1 * m)) / (kPi * m);
    taps[i] = ideal * win[i];
  }
  return taps;
}

std::vector<double> filtfilt_reflect(std::span<const double> x, std::span<const double> taps) {
  const int n = static_cast<int>(x.size());
  const int nt = static_cast<int>(taps.size());
  if (n == 0) return {};
  const int pad = nt;
  auto reflect_at = [&](int i) {
    while (i < 0 || i >= n) {
      if (i < 0) i = -i;
      if (i >= n) i = 2 * (n - 1) - i;
    }
    return i;
  };
  std::vector<double> ext(static_cast<std::size_t>(n + 2 * pad));
  for (int i = 0; i < n + 2 * pad; ++i) ext[i] = x[reflect_at(i - pad)];

  const int mid = nt / 2;
  auto pass = [&](const std::vector<double>& in) {
    std::vector<double> out(in.size(), 0.0);
    const int m = static_cast<int>(in.size());
    for (int i = 0; i < m; ++i) {
      double acc = 0.0;
      for (int k = 0; k < nt; ++k) {
        int j = i + k - mid;
        if (j >= 0 && j < m) acc += in[j] * taps[k];
      }
      out[i] = acc;
    }
    return out;
  };

  std::vector<double> fwd = pass(ext);
  std::reverse(fwd.begin(), fwd.end());
  std::vector<double> bwd = pass(fwd);
  std::reverse(bwd.begin(), bwd.end());
  return {bwd.begin() + pad, bwd.begin() + pad + n};
}

std::vector<std::complex<double>> analytic_signal(std::span<const double> x) {
  const int n = static_cast<int>(x.size());
  if (n == 0) return {};
  // even reflection to 2n, analytic via one-sided spectrum, keep first n
  const int m = 2 * n;
  std::vector<std::complex<double>> buf(static_cast<std::size_t>(m));
  for (int i = 0; i < n; ++i) buf[i] = x[i];
  for (int i = 0; i < n; ++i) buf[n + i] = x[n - 1 - i];
  auto spec = fft(buf);
  for (int k = 1; k < m / 2; ++k) spec[k] *= 2.0;
  for (int k = m / 2 + 1; k < m; ++k) spec[k] = 0.0;
  auto full = ifft(spec);
  return {full.begin(), full.begin() + n};
}

std::vector<double> upsample2_fft(std::span<const double> x) {
  const int n = static_cast<int>(x.size());
  if (n <= 1) return std::vector<double>(x.begin(), x.end());
  auto spec = fft_real(x);
  const int m = 2 * n;
  std::vector<std::complex<double>> zp(static_cast<std::size_t>(m), 0.0);
  const int half = n / 2;
  for (int k = 0; k <= half; ++k) zp[k] = spec[k];
  for (int k = half + 1; k < n; ++k) zp[m - n + k] = spec[k];
  if (n % 2 == 0) {
    zp[half] = spec[half] * 0.5;
    zp[m - half] = spec[half] * 0.5;
  }
  auto y = ifft(zp);
  std::vector<double> out(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) out[i] = 2.0 * y[i].real();
  return out;
}

std::vector<double> upsample2_midpoint(std::span<const double> x, int half_taps) {
  return midpoint_upsample_impl<double>(x, half_taps);
}

std::vector<std::complex<double>> upsample2_midpoint(std::span<const std::complex<double>> x,
                                                     int half_taps) {
  return midpoint_upsample_impl<std::complex<double>>(x, half_taps);
}

double lag_one_frequency(std::span<const std::complex<double>> y, double fs) {
  if (y.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  std::complex<double> acc = 0.0;
  for (std::size_t i = 0; i + 1 < y.size(); ++i) acc += std::conj(y[i]) * y[i + 1];
  if (acc == std::complex<double>(0.0, 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return fs / (2.0 * kPi) * std::arg(acc);
}

}  // namespace nlhr
