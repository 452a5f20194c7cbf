// SPDX-License-Identifier: Apache-2.0
#include "nlhr/beamforming.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "nlhr/errors.hpp"
#include "nlhr/parallel.hpp"
#include "nlhr/signal.hpp"

namespace nlhr {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kFwhmToSigma = 2.354820045030949;  // 2 sqrt(2 ln 2)
constexpr double kSigmaCut = 3.0;                   // truncation radius in sigmas

double deg2rad(double d) { return d * kPi / 180.0; }

// delayed-sample fetch, linear interpolation between fast-time samples
inline double fetch(std::span<const float> line, double u) {
  if (u < 0.0) return 0.0;
  const int n = static_cast<int>(line.size());
  const int i0 = static_cast<int>(u);
  if (i0 >= n - 1) return 0.0;
  const double t = u - i0;
  return (1.0 - t) * line[i0] + t * line[i0 + 1];
}
}  // namespace

PixelPoints points_from_grid(const ImagingGrid& grid) {
  PixelPoints pts;
  const int np = grid.num_pixels();
  pts.x.resize(static_cast<std::size_t>(np));
  pts.z.resize(static_cast<std::size_t>(np));
  for (int p = 0; p < np; ++p) {
    pts.x[p] = grid.pixel_x(p);
    pts.z[p] = grid.pixel_z(p);
  }
  return pts;
}

DelayTable compute_delays(const TransducerArray& array, const PixelPoints& points,
                          double sound_speed) {
  for (double z : points.z)
    if (!(z > 0.0)) throw ConfigError("compute_delays: point depths must be positive");
  DelayTable t;
  t.num_channels = array.num_elements;
  t.num_points = points.size();
  t.tau.resize(static_cast<std::size_t>(t.num_points) * t.num_channels);
  for (int p = 0; p < t.num_points; ++p) {
    const double xp = points.x[p];
    const double zp = points.z[p];
    double* row = t.tau.data() + static_cast<std::size_t>(p) * t.num_channels;
    for (int c = 0; c < t.num_channels; ++c) {
      const double dx = array.element_x[c] - xp;
      row[c] = (zp + std::sqrt(dx * dx + zp * zp)) / sound_speed;
    }
  }
  return t;
}

DelayTable compute_delays(const TransducerArray& array, const ImagingGrid& grid,
                          double sound_speed) {
  return compute_delays(array, points_from_grid(grid), sound_speed);
}

namespace {
// shared builder for truncated, unit-sum Gaussian windows over channel index
void append_gaussian_window(double center_index, double sigma, int num_channels,
                            std::vector<std::int32_t>& begin, std::vector<std::int32_t>& offset,
                            std::vector<std::int32_t>& len, std::vector<float>& weights) {
  int lo = static_cast<int>(std::ceil(center_index - kSigmaCut * sigma));
  int hi = static_cast<int>(std::floor(center_index + kSigmaCut * sigma));
  lo = std::max(lo, 0);
  hi = std::min(hi, num_channels - 1);
  if (lo > hi) {  // degenerate width: keep the nearest element
    lo = hi = std::clamp(static_cast<int>(std::lround(center_index)), 0, num_channels - 1);
  }
  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
  begin.push_back(lo);
  offset.push_back(static_cast<std::int32_t>(weights.size()));
  len.push_back(hi - lo + 1);
  double sum = 0.0;
  const std::size_t base = weights.size();
  for (int j = lo; j <= hi; ++j) {
    const double d = j - center_index;
    const double w = std::exp(-d * d * inv2s2);
    weights.push_back(static_cast<float>(w));
    sum += w;
  }
  const float inv = static_cast<float>(1.0 / sum);
  for (std::size_t k = base; k < weights.size(); ++k) weights[k] *= inv;
}
}  // namespace

ApodizationProfile ApodizationProfile::build(const TransducerArray& array,
                                             const PixelPoints& points, double f_number) {
  if (!(f_number > 0.0)) throw ConfigError("apodization: f_number must be positive");
  ApodizationProfile prof;
  const int nc = array.num_elements;
  const int np = points.size();
  prof.num_channels_ = nc;
  prof.begin_.reserve(static_cast<std::size_t>(np) * nc);
  prof.offset_.reserve(static_cast<std::size_t>(np) * nc);
  prof.len_.reserve(static_cast<std::size_t>(np) * nc);
  for (int p = 0; p < np; ++p) {
    const double xp = points.x[p];
    const double zp = points.z[p];
    for (int i = 0; i < nc; ++i) {
      const double dx = array.element_x[i] - xp;
      const double dist = std::sqrt(dx * dx + zp * zp);
      const double fwhm_elements = dist / (f_number * array.pitch);
      const double sigma = std::max(fwhm_elements / kFwhmToSigma, 1e-6);
      append_gaussian_window(i, sigma, nc, prof.begin_, prof.offset_, prof.len_, prof.weights_);
    }
  }
  return prof;
}

SubApertureWindows SubApertureWindows::build(const TransducerArray& array,
                                             const PixelPoints& points, double alpha_deg,
                                             Side side, double f_number) {
  if (!(alpha_deg > 0.0 && alpha_deg < 45.0))
    throw ConfigError("sub-aperture: alpha must lie in (0, 45) degrees");
  SubApertureWindows sw;
  const int nc = array.num_elements;
  const int np = points.size();
  const double tan_a = std::tan(deg2rad(alpha_deg));
  const double sign = side == Side::left ? -1.0 : 1.0;
  sw.center_.resize(static_cast<std::size_t>(np));
  for (int p = 0; p < np; ++p) {
    const double xp = points.x[p];
    const double zp = points.z[p];
    const double xc = xp + sign * zp * tan_a;
    const int ci = static_cast<int>(std::lround((xc - array.element_x[0]) / array.pitch));
    if (ci < 0 || ci >= nc) {
      sw.center_[p] = -1;  // masked: required center lies outside the aperture
      sw.begin_.push_back(0);
      sw.offset_.push_back(static_cast<std::int32_t>(sw.weights_.size()));
      sw.len_.push_back(0);
      continue;
    }
    sw.center_[p] = ci;
    const double dx = array.element_x[ci] - xp;
    const double dist = std::sqrt(dx * dx + zp * zp);
    const double sigma = std::max(dist / (f_number * array.pitch) / kFwhmToSigma, 1e-6);
    append_gaussian_window(ci, sigma, nc, sw.begin_, sw.offset_, sw.len_, sw.weights_);
  }
  return sw;
}

ChannelBeamCube channel_directive_beams(const RFFrameSet& rf, const DelayTable& delays,
                                        const ApodizationProfile& apod, int threads) {
  if (delays.num_channels != rf.num_channels)
    throw PipelineError("channel_directive_beams: channel count mismatch");
  ChannelBeamCube cube;
  cube.num_channels = rf.num_channels;
  cube.num_points = delays.num_points;
  cube.num_frames = rf.num_frames;
  cube.values.resize(static_cast<std::size_t>(cube.num_channels) * cube.num_points *
                     cube.num_frames);
  const double fs = rf.sampling_frequency;
  const int nc = cube.num_channels;
  const int np = cube.num_points;

  parallel_for(static_cast<std::size_t>(cube.num_frames), threads, [&](std::size_t f) {
    std::vector<double> delayed(static_cast<std::size_t>(nc));
    double* frame_out = cube.values.data() + static_cast<std::size_t>(f) * nc * np;
    for (int p = 0; p < np; ++p) {
      const double* tau = delays.tau.data() + static_cast<std::size_t>(p) * nc;
      for (int j = 0; j < nc; ++j)
        delayed[j] = fetch(rf.line(static_cast<int>(f), j), (tau[j] - rf.start_time) * fs);
      for (int i = 0; i < nc; ++i) {
        const WindowRef w = apod.window(p, i);
        double acc = 0.0;
        for (std::size_t k = 0; k < w.w.size(); ++k) acc += w.w[k] * delayed[w.begin + k];
        frame_out[static_cast<std::size_t>(i) * np + p] = acc;
      }
    }
  });
  return cube;
}

SubApertureChannelSignals form_subapertures(const ChannelBeamCube& cube,
                                            const SubApertureWindows& left,
                                            const SubApertureWindows& right, int point,
                                            int frame) {
  SubApertureChannelSignals out;
  auto fill = [&](const SubApertureWindows& sw, std::vector<double>& dst, int& begin,
                  bool& valid) {
    valid = sw.valid(point);
    if (!valid) return;
    const WindowRef w = sw.window(point);
    begin = w.begin;
    dst.resize(w.w.size());
    for (std::size_t k = 0; k < w.w.size(); ++k)
      dst[k] = static_cast<double>(w.w[k]) * cube.at(frame, w.begin + static_cast<int>(k), point);
  };
  fill(left, out.left, out.left_begin, out.left_valid);
  fill(right, out.right, out.right_begin, out.right_valid);
  return out;
}

double das_beamform(std::span<const double> a) {
  double sum = 0.0;
  for (double v : a) sum += v;
  return sum;
}

double mas_beamform(std::span<const double> a, MasMode mode) {
  if (a.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  // sum_{i<j} b_i b_j == ((sum b)^2 - sum b^2) / 2
  double s1 = 0.0, s2 = 0.0;
  if (mode == MasMode::product) {
    for (double v : a) {
      s1 += v;
      s2 += v * v;
    }
  } else {
    for (double v : a) {
      const double b = std::copysign(std::sqrt(std::abs(v)), v);
      s1 += b;
      s2 += std::abs(v);
    }
  }
  return 0.5 * (s1 * s1 - s2);
}

std::uint64_t multiplication_count(std::uint64_t n) {
  if (n < 2) throw std::invalid_argument("multiplication_count: need at least 2 channels");
  return (n * n - n) / 2;
}

SubApertureEnsemble beamform_ensemble(const RFFrameSet& rf, const TransducerArray& array,
                                      const AcquisitionConfig& cfg, const PixelPoints& points,
                                      BeamformerKind kind, MasMode mode, int threads) {
  validated(cfg);
  const DelayTable delays = compute_delays(array, points, cfg.sound_speed);
  const ApodizationProfile apod = ApodizationProfile::build(array, points, cfg.f_number);
  const int na = static_cast<int>(cfg.alpha_deg.size());
  std::vector<SubApertureWindows> lw, rw;
  lw.reserve(na);
  rw.reserve(na);
  for (double a : cfg.alpha_deg) {
    lw.push_back(SubApertureWindows::build(array, points, a, Side::left, cfg.f_number));
    rw.push_back(SubApertureWindows::build(array, points, a, Side::right, cfg.f_number));
  }

  SubApertureEnsemble ens;
  ens.tag = kind;
  ens.mas_mode = mode;
  ens.center_frequency_out =
      kind == BeamformerKind::nlhr ? 2.0 * cfg.center_frequency : cfg.center_frequency;
  ens.prf_effective = rf.prf_effective;
  ens.alpha_deg = cfg.alpha_deg;
  ens.num_points = points.size();
  ens.num_frames = rf.num_frames;
  const std::size_t cube = static_cast<std::size_t>(na) * ens.num_frames * ens.num_points;
  ens.left.assign(cube, 0.0f);
  ens.right.assign(cube, 0.0f);
  ens.left_valid.assign(static_cast<std::size_t>(na) * ens.num_points, 0);
  ens.right_valid.assign(static_cast<std::size_t>(na) * ens.num_points, 0);

  const int nc = rf.num_channels;
  const int np = ens.num_points;
  const double fs = rf.sampling_frequency;

  // validity is frame independent: a side needs >= 2 channels for MAS
  const std::size_t min_channels = kind == BeamformerKind::nlhr ? 2 : 1;
  for (int a = 0; a < na; ++a) {
    for (int p = 0; p < np; ++p) {
      ens.left_valid[ens.vidx(a, p)] =
          lw[a].valid(p) && lw[a].window(p).w.size() >= min_channels;
      ens.right_valid[ens.vidx(a, p)] =
          rw[a].valid(p) && rw[a].window(p).w.size() >= min_channels;
    }
  }

  parallel_for(static_cast<std::size_t>(ens.num_frames), threads, [&](std::size_t f) {
    std::vector<double> delayed(static_cast<std::size_t>(nc));
    std::vector<double> beams(static_cast<std::size_t>(nc));
    for (int p = 0; p < np; ++p) {
      const double* tau = delays.tau.data() + static_cast<std::size_t>(p) * nc;
      for (int j = 0; j < nc; ++j)
        delayed[j] = fetch(rf.line(static_cast<int>(f), j), (tau[j] - rf.start_time) * fs);
      for (int i = 0; i < nc; ++i) {
        const WindowRef w = apod.window(p, i);
        double acc = 0.0;
        for (std::size_t k = 0; k < w.w.size(); ++k) acc += w.w[k] * delayed[w.begin + k];
        beams[i] = acc;
      }
      for (int a = 0; a < na; ++a) {
        auto reduce = [&](const SubApertureWindows& sw, float* dst, const std::uint8_t* valid) {
          if (!valid[ens.vidx(a, p)]) return;
          const WindowRef w = sw.window(p);
          double value;
          if (kind == BeamformerKind::das) {
            double s = 0.0;
            for (std::size_t k = 0; k < w.w.size(); ++k) s += w.w[k] * beams[w.begin + k];
            value = s;
          } else {
            double s1 = 0.0, s2 = 0.0;
            if (mode == MasMode::product) {
              for (std::size_t k = 0; k < w.w.size(); ++k) {
                const double v = w.w[k] * beams[w.begin + k];
                s1 += v;
                s2 += v * v;
              }
            } else {
              for (std::size_t k = 0; k < w.w.size(); ++k) {
                const double v = w.w[k] * beams[w.begin + k];
                const double b = std::copysign(std::sqrt(std::abs(v)), v);
                s1 += b;
                s2 += std::abs(v);
              }
            }
            value = 0.5 * (s1 * s1 - s2);
          }
          dst[ens.idx(a, static_cast<int>(f), p)] = static_cast<float>(value);
        };
        reduce(lw[a], ens.left.data(), ens.left_valid.data());
        reduce(rw[a], ens.right.data(), ens.right_valid.data());
      }
    }
  });
  return ens;
}

SubApertureEnsemble bandpass_2f0(const SubApertureEnsemble& ens, const AcquisitionConfig& cfg,
                                 const ImagingGrid& grid, int threads) {
  if (ens.tag != BeamformerKind::nlhr)
    throw PipelineError("bandpass_2f0: requires an nlhr ensemble");
  if (grid.num_pixels() != ens.num_points)
    throw PipelineError("bandpass_2f0: grid does not match ensemble");
  const double f0 = cfg.center_frequency;
  const double dz = grid.z_spacing();
  const double axial_fs = cfg.sound_speed / (2.0 * dz);  // depth maps to time as t = 2z/c
  if (!(2.5 * f0 < 0.5 * axial_fs))
    throw ConfigError(
        "bandpass_2f0: axial pixel spacing too coarse to represent the 2 f0 band; need "
        "z_spacing < c / (10 f0)");
  const auto taps = design_bandpass_fir(1.5 * f0, 2.5 * f0, axial_fs, 40.0, 1.0 * f0);

  SubApertureEnsemble out = ens;
  const int na = static_cast<int>(ens.alpha_deg.size());
  const int nz = grid.num_z();
  const int nx = grid.num_x();
  const std::size_t runs = static_cast<std::size_t>(na) * ens.num_frames * nx;
  parallel_for(runs, threads, [&](std::size_t r) {
    const int a = static_cast<int>(r / (static_cast<std::size_t>(ens.num_frames) * nx));
    const int rem = static_cast<int>(r % (static_cast<std::size_t>(ens.num_frames) * nx));
    const int f = rem / nx;
    const int ix = rem % nx;
    std::vector<double> run(static_cast<std::size_t>(nz));
    for (auto [src, dst] : {std::pair{&ens.left, &out.left}, std::pair{&ens.right, &out.right}}) {
      const std::size_t base = ens.idx(a, f, ix * nz);
      for (int iz = 0; iz < nz; ++iz) run[iz] = (*src)[base + iz];
      auto filtered = filtfilt_reflect(run, taps);
      for (int iz = 0; iz < nz; ++iz) (*dst)[base + iz] = static_cast<float>(filtered[iz]);
    }
  });
  return out;
}

SlowTimeEnsemble to_slowtime_ensemble(const SubApertureEnsemble& ens, const ImagingGrid& grid,
                                      int threads) {
  if (grid.num_pixels() != ens.num_points)
    throw PipelineError("to_slowtime_ensemble: grid does not match ensemble");
  SlowTimeEnsemble st;
  st.tag = ens.tag;
  st.carrier_hz = ens.center_frequency_out;
  st.prf_effective = ens.prf_effective;
  st.alpha_deg = ens.alpha_deg;
  st.num_points = ens.num_points;
  st.num_frames = ens.num_frames;
  const int na = static_cast<int>(ens.alpha_deg.size());
  const std::size_t n = static_cast<std::size_t>(na) * ens.num_points * ens.num_frames;
  st.left.assign(n, {0.0f, 0.0f});
  st.right.assign(n, {0.0f, 0.0f});
  st.left_valid = ens.left_valid;
  st.right_valid = ens.right_valid;

  const int nz = grid.num_z();
  const int nx = grid.num_x();
  const std::size_t runs = static_cast<std::size_t>(na) * ens.num_frames * nx;
  parallel_for(runs, threads, [&](std::size_t r) {
    const int a = static_cast<int>(r / (static_cast<std::size_t>(ens.num_frames) * nx));
    const int rem = static_cast<int>(r % (static_cast<std::size_t>(ens.num_frames) * nx));
    const int f = rem / nx;
    const int ix = rem % nx;
    std::vector<double> run(static_cast<std::size_t>(nz));
    for (auto [src, dst] :
         {std::pair{&ens.left, &st.left}, std::pair{&ens.right, &st.right}}) {
      const std::size_t base = ens.idx(a, f, ix * nz);
      for (int iz = 0; iz < nz; ++iz) run[iz] = (*src)[base + iz];
      const auto analytic = analytic_signal(run);
      // conjugate so that motion toward increasing depth advances the
      // slow-time phase (positive Doppler for flow away from the probe)
      for (int iz = 0; iz < nz; ++iz) {
        const auto v = std::conj(analytic[iz]);
        (*dst)[st.idx(a, ix * nz + iz, f)] = {static_cast<float>(v.real()),
                                              static_cast<float>(v.imag())};
      }
    }
  });
  return st;
}

RFFrameSet resample_rf(const RFFrameSet& rf, int axial_factor, int temporal_factor,
                       int threads) {
  if ((axial_factor != 1 && axial_factor != 2) || (temporal_factor != 1 && temporal_factor != 2))
    throw ConfigError("resample_rf: factors must be 1 or 2");

  RFFrameSet ax = rf;
  if (axial_factor == 2) {
    ax.num_samples = 2 * rf.num_samples;
    ax.sampling_frequency = 2.0 * rf.sampling_frequency;
    ax.allocate();
    parallel_for(static_cast<std::size_t>(rf.num_frames), threads, [&](std::size_t f) {
      std::vector<double> line(static_cast<std::size_t>(rf.num_samples));
      for (int c = 0; c < rf.num_channels; ++c) {
        auto src = rf.line(static_cast<int>(f), c);
        for (int s = 0; s < rf.num_samples; ++s) line[s] = src[s];
        auto up = upsample2_fft(line);
        for (int s = 0; s < ax.num_samples; ++s)
          ax.at(static_cast<int>(f), c, s) = static_cast<float>(up[s]);
      }
    });
  }

  if (temporal_factor == 1) return ax;

  RFFrameSet out = ax;
  out.num_frames = 2 * ax.num_frames;
  out.prf_effective = 2.0 * ax.prf_effective;
  out.allocate();
  parallel_for(static_cast<std::size_t>(ax.num_channels), threads, [&](std::size_t c) {
    std::vector<double> series(static_cast<std::size_t>(ax.num_frames));
    for (int s = 0; s < ax.num_samples; ++s) {
      for (int f = 0; f < ax.num_frames; ++f) series[f] = ax.at(f, static_cast<int>(c), s);
      auto up = upsample2_midpoint(std::span<const double>(series));
      for (int f = 0; f < out.num_frames; ++f)
        out.at(f, static_cast<int>(c), s) = static_cast<float>(up[f]);
    }
  });
  return out;
}

}  // namespace nlhr
