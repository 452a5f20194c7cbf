// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "nlhr/geometry.hpp"
#include "nlhr/rf_frameset.hpp"

namespace nlhr {

/// Arbitrary set of beamforming points (a lattice grid or a rotated line).
struct PixelPoints {
  std::vector<double> x, z;  // [m]
  int size() const { return static_cast<int>(x.size()); }
};

PixelPoints points_from_grid(const ImagingGrid& grid);

/// Plane-wave receive delays tau = (z_p + dist(element, pixel)) / c.
struct DelayTable {
  int num_channels = 0;
  int num_points = 0;
  std::vector<double> tau;  // [point][channel], seconds

  double at(int point, int channel) const {
    return tau[static_cast<std::size_t>(point) * num_channels + channel];
  }
};

DelayTable compute_delays(const TransducerArray& array, const PixelPoints& points,
                          double sound_speed);
DelayTable compute_delays(const TransducerArray& array, const ImagingGrid& grid,
                          double sound_speed);

struct WindowRef {
  int begin = 0;                 // first channel index covered
  std::span<const float> w;      // weights, unit sum
};

/// Gaussian receive apodization per (point, beam center): FWHM equals the
/// element-to-point distance divided by the F-number, in element units;
/// truncated at 3 sigma and renormalized to unit sum.
class ApodizationProfile {
 public:
  static ApodizationProfile build(const TransducerArray& array, const PixelPoints& points,
                                  double f_number);

  WindowRef window(int point, int center_element) const {
    const std::size_t k = static_cast<std::size_t>(point) * num_channels_ + center_element;
    return {begin_[k], {weights_.data() + offset_[k], static_cast<std::size_t>(len_[k])}};
  }
  int num_channels() const { return num_channels_; }

 private:
  int num_channels_ = 0;
  std::vector<std::int32_t> begin_, offset_, len_;
  std::vector<float> weights_;
};

/// Per-pixel channel-directive beams s_i(p) = sum_j W_{i,p}(j) e_j(tau_{j,p});
/// delayed samples fetched by linear interpolation in fast time.
struct ChannelBeamCube {
  int num_channels = 0, num_points = 0, num_frames = 0;
  std::vector<double> values;  // [frame][channel][point]

  double at(int frame, int channel, int point) const {
    return values[(static_cast<std::size_t>(frame) * num_channels + channel) * num_points + point];
  }
};

ChannelBeamCube channel_directive_beams(const RFFrameSet& rf, const DelayTable& delays,
                                        const ApodizationProfile& apod, int threads = 1);

enum class Side { left, right };

/// Gaussian weights over beam centers for one (alpha, side): centered at the
/// element nearest x_p -/+ z_p tan(alpha); points whose center falls outside
/// the aperture are masked.
class SubApertureWindows {
 public:
  static SubApertureWindows build(const TransducerArray& array, const PixelPoints& points,
                                  double alpha_deg, Side side, double f_number);

  bool valid(int point) const { return center_[point] >= 0; }
  int center(int point) const { return center_[point]; }
  WindowRef window(int point) const {
    const auto k = static_cast<std::size_t>(point);
    return {begin_[k], {weights_.data() + offset_[k], static_cast<std::size_t>(len_[k])}};
  }

 private:
  std::vector<std::int32_t> center_, begin_, offset_, len_;
  std::vector<float> weights_;
};

/// Alpha-weighted per-channel signals A_L, A_R for one point and frame
/// (the not-yet-summed sub-aperture signals).
struct SubApertureChannelSignals {
  std::vector<double> left, right;
  int left_begin = 0, right_begin = 0;
  bool left_valid = false, right_valid = false;
};

SubApertureChannelSignals form_subapertures(const ChannelBeamCube& cube,
                                            const SubApertureWindows& left,
                                            const SubApertureWindows& right, int point,
                                            int frame);

enum class MasMode { product, signed_sqrt };
enum class BeamformerKind { das, nlhr };

/// Sum over channels (reference linear beamformer).
double das_beamform(std::span<const double> a);

/// Pairwise multiply-and-sum over channels: product mode sums A_i * A_j over
/// i < j; signed_sqrt applies sign(x)sqrt(|x|) to each term first. Returns
/// NaN when fewer than 2 channels are available.
double mas_beamform(std::span<const double> a, MasMode mode = MasMode::product);

/// Number of pairwise products for an N-channel aperture: (N^2 - N) / 2.
std::uint64_t multiplication_count(std::uint64_t n);

/// Beamformed left/right sub-aperture signals for every alpha.
struct SubApertureEnsemble {
  BeamformerKind tag = BeamformerKind::das;
  MasMode mas_mode = MasMode::product;
  double center_frequency_out = 0.0;  // f0 for das, 2 f0 for nlhr
  double prf_effective = 0.0;
  std::vector<double> alpha_deg;
  int num_points = 0, num_frames = 0;
  std::vector<float> left, right;                // [alpha][frame][point]
  std::vector<std::uint8_t> left_valid, right_valid;  // [alpha][point]

  std::size_t idx(int alpha, int frame, int point) const {
    return (static_cast<std::size_t>(alpha) * num_frames + frame) * num_points + point;
  }
  std::size_t vidx(int alpha, int point) const {
    return static_cast<std::size_t>(alpha) * num_points + point;
  }
};

/// Full receive chain up to the beamformed sub-aperture cubes. `rf` must
/// already be resampled.
SubApertureEnsemble beamform_ensemble(const RFFrameSet& rf, const TransducerArray& array,
                                      const AcquisitionConfig& cfg, const PixelPoints& points,
                                      BeamformerKind kind, MasMode mode = MasMode::product,
                                      int threads = 1);

/// Zero-phase FIR band-pass [1.5 f0, 2.5 f0] along the axial pixel runs of
/// each frame; sampling rate along depth is c / (2 dz). Requires an nlhr
/// ensemble and a fine enough axial spacing.
SubApertureEnsemble bandpass_2f0(const SubApertureEnsemble& ens, const AcquisitionConfig& cfg,
                                 const ImagingGrid& grid, int threads = 1);

/// Complex slow-time series per (alpha, side, pixel): analytic signal along
/// the axial dimension per frame, oriented so that motion toward increasing
/// depth produces a positive slow-time frequency.
struct SlowTimeEnsemble {
  BeamformerKind tag = BeamformerKind::das;
  double carrier_hz = 0.0;  // f' for the velocity estimators
  double prf_effective = 0.0;
  std::vector<double> alpha_deg;
  int num_points = 0, num_frames = 0;
  std::vector<std::complex<float>> left, right;       // [alpha][point][frame]
  std::vector<std::uint8_t> left_valid, right_valid;  // [alpha][point]

  std::size_t idx(int alpha, int point, int frame) const {
    return (static_cast<std::size_t>(alpha) * num_points + point) * num_frames + frame;
  }
  std::size_t vidx(int alpha, int point) const {
    return static_cast<std::size_t>(alpha) * num_points + point;
  }
};

SlowTimeEnsemble to_slowtime_ensemble(const SubApertureEnsemble& ens, const ImagingGrid& grid,
                                      int threads = 1);

/// Fast-time upsampling by FFT zero padding and slow-time (frame) upsampling
/// by band-limited midpoint interpolation. Factors must be 1 or 2.
RFFrameSet resample_rf(const RFFrameSet& rf, int axial_factor, int temporal_factor,
                       int threads = 1);

}  // namespace nlhr
