// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "nlhr/beamforming.hpp"
#include "nlhr/geometry.hpp"
#include "nlhr/phantom.hpp"

namespace nlhr {

enum class EstimatorKind { tac, dcc };

struct EstimatorConfig {
  double k_window_s = 0.8e-3;            // autocorrelation / averaging window k
  double l_window_wavelengths = 20.0;    // directional correlation length L
  double dcc_spacing_wavelengths = 0.1;  // directional sampling interval
  EstimatorKind estimator = EstimatorKind::tac;
  double f_prime_hz = 0.0;               // f0 (das) or 2 f0 (nlhr); 0 = take from ensemble
  int dcc_lag_frames = 1;
  int dcc_max_shift_samples = 8;         // correlation search half-range
};

std::vector<std::string> validate_estimator(const EstimatorConfig& cfg, double prf_effective);

/// Mean Doppler frequency from the lag-one autocorrelation phase
/// (f = prf / 2pi * arg sum conj(y_n) y_{n+1}). NaN for an all-zero window.
double kasai_frequency(std::span<const std::complex<double>> y, double prf_effective);

struct VelocityComponents {
  double axial = 0.0;    // toward increasing depth [m/s]
  double lateral = 0.0;  // toward increasing x [m/s]
};

/// Triangulation from left/right sub-aperture Doppler frequencies:
///   v cos(theta) = (f_L + f_R) / (1 + cos alpha) * c / (2 f')
///   v sin(theta) = (f_L - f_R) / sin(alpha)      * c / (2 f')
VelocityComponents tac_estimate(double f_left, double f_right, double alpha_deg,
                                double f_prime, double sound_speed);

/// Per-pixel velocity magnitude/angle per estimation window. The angle is
/// measured from the axial (depth) axis, positive toward positive x, in
/// (-180, 180].
struct VelocityField {
  int num_points = 0;
  int num_windows = 0;
  std::vector<double> window_time_s;                 // window center times
  std::vector<float> magnitude, angle_deg;           // [window][point]
  std::vector<float> axial, lateral;                 // [window][point]
  std::vector<std::uint8_t> valid;                   // [window][point]

  std::size_t idx(int w, int p) const {
    return static_cast<std::size_t>(w) * num_points + p;
  }
};

/// TAC over every alpha: Kasai per side per alpha within each k-window,
/// tac_estimate per alpha, component-wise mean over alpha, then a spatial
/// box average over an L-window-long axial segment.
VelocityField tac_field(const SlowTimeEnsemble& st, const EstimatorConfig& cfg,
                        const ImagingGrid& grid, double sound_speed, int threads = 1);

/// Sample points along the flow direction centered on a pixel, spaced
/// `spacing` wavelengths, spanning [-L/2, L/2]. Points outside the imaging
/// region are masked.
struct DirectionalLine {
  PixelPoints points;
  std::vector<std::uint8_t> inside;
  double spacing_m = 0.0;
};

DirectionalLine directional_line(Vec2 pixel, double flow_angle_deg, double l_wavelengths,
                                 double spacing_wavelengths, double wavelength,
                                 const ImagingGrid& grid);

/// Directional signals for one pixel: one stream per (alpha, side),
/// values[frame][point].
struct DirectionalSignals {
  int num_frames = 0;
  int num_points = 0;
  std::vector<double> values;

  double at(int f, int p) const {
    return values[static_cast<std::size_t>(f) * num_points + p];
  }
};

/// Normalized cross-correlation between directional signals `lag` frames
/// apart; correlation functions are averaged over each k-window, the peak is
/// refined with 3-point parabolic interpolation, and estimates are averaged
/// over the streams. Returns a signed velocity along the flow direction per
/// window (NaN where no stream yields a usable correlation).
std::vector<double> dcc_estimate(std::span<const DirectionalSignals> streams,
                                 double prf_effective, int lag, const EstimatorConfig& cfg,
                                 double sample_spacing_m);

}  // namespace nlhr
