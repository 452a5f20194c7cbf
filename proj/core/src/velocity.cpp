// SPDX-License-Identifier: Apache-2.0
#include "nlhr/velocity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "nlhr/errors.hpp"
#include "nlhr/parallel.hpp"
#include "nlhr/signal.hpp"

namespace nlhr {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
double deg2rad(double d) { return d * kPi / 180.0; }
}  // namespace

std::vector<std::string> validate_estimator(const EstimatorConfig& cfg, double prf_effective) {
  std::vector<std::string> errs;
  if (!(cfg.k_window_s * prf_effective >= 2.0))
    errs.push_back("k_window: must span at least 2 slow-time samples");
  if (!(cfg.l_window_wavelengths > 0.0)) errs.push_back("L_window: must be positive");
  if (!(cfg.dcc_spacing_wavelengths > 0.0)) errs.push_back("dcc_spacing: must be positive");
  if (cfg.dcc_lag_frames < 1) errs.push_back("dcc_lag: must be >= 1");
  return errs;
}

double kasai_frequency(std::span<const std::complex<double>> y, double prf_effective) {
  if (y.size() < 2) return kNaN;
  return lag_one_frequency(y, prf_effective);
}

VelocityComponents tac_estimate(double f_left, double f_right, double alpha_deg,
                                double f_prime, double sound_speed) {
  const double a = deg2rad(alpha_deg);
  const double scale = sound_speed / (2.0 * f_prime);
  return {(f_left + f_right) / (1.0 + std::cos(a)) * scale,
          (f_left - f_right) / std::sin(a) * scale};
}

namespace {
float wrap_angle_deg(double deg) {
  while (deg <= -180.0) deg += 360.0;
  while (deg > 180.0) deg -= 360.0;
  return static_cast<float>(deg);
}
}  // namespace

VelocityField tac_field(const SlowTimeEnsemble& st, const EstimatorConfig& cfg,
                        const ImagingGrid& grid, double sound_speed, int threads) {
  if (grid.num_pixels() != st.num_points) throw PipelineError("tac_field: grid mismatch");
  auto errs = validate_estimator(cfg, st.prf_effective);
  if (!errs.empty()) throw ConfigError("tac_field: " + errs.front());
  const double f_prime = cfg.f_prime_hz > 0.0 ? cfg.f_prime_hz : st.carrier_hz;
  const double f0 = st.tag == BeamformerKind::nlhr ? st.carrier_hz / 2.0 : st.carrier_hz;
  const double wavelength = sound_speed / f0;
  const int win = std::max(2, static_cast<int>(std::lround(cfg.k_window_s * st.prf_effective)));
  const int num_windows = st.num_frames / win;
  if (num_windows < 1) throw ConfigError("tac_field: acquisition shorter than one k_window");
  const int na = static_cast<int>(st.alpha_deg.size());
  const int np = st.num_points;
  const int nz = grid.num_z();

  VelocityField field;
  field.num_points = np;
  field.num_windows = num_windows;
  field.window_time_s.resize(static_cast<std::size_t>(num_windows));
  for (int w = 0; w < num_windows; ++w)
    field.window_time_s[w] = (w + 0.5) * win / st.prf_effective;
  const std::size_t n = static_cast<std::size_t>(num_windows) * np;
  field.magnitude.assign(n, 0.0f);
  field.angle_deg.assign(n, 0.0f);
  field.axial.assign(n, 0.0f);
  field.lateral.assign(n, 0.0f);
  field.valid.assign(n, 0);

  // per-pixel component means over alpha, before the spatial L average
  std::vector<double> ax(n, 0.0), lat(n, 0.0);
  std::vector<std::uint8_t> ok(n, 0);

  parallel_for(static_cast<std::size_t>(np), threads, [&](std::size_t pi) {
    const int p = static_cast<int>(pi);
    std::vector<std::complex<double>> seg(static_cast<std::size_t>(win));
    for (int w = 0; w < num_windows; ++w) {
      double sum_ax = 0.0, sum_lat = 0.0;
      int count = 0;
      for (int a = 0; a < na; ++a) {
        if (!st.left_valid[st.vidx(a, p)] || !st.right_valid[st.vidx(a, p)]) continue;
        auto kasai_side = [&](const std::vector<std::complex<float>>& data) {
          const std::size_t base = st.idx(a, p, w * win);
          for (int i = 0; i < win; ++i)
            seg[i] = {static_cast<double>(data[base + i].real()),
                      static_cast<double>(data[base + i].imag())};
          return kasai_frequency(seg, st.prf_effective);
        };
        const double fl = kasai_side(st.left);
        const double fr = kasai_side(st.right);
        if (std::isnan(fl) || std::isnan(fr)) continue;
        const auto comp = tac_estimate(fl, fr, st.alpha_deg[a], f_prime, sound_speed);
        sum_ax += comp.axial;
        sum_lat += comp.lateral;
        ++count;
      }
      if (count > 0) {
        const std::size_t k = field.idx(w, p);
        ax[k] = sum_ax / count;
        lat[k] = sum_lat / count;
        ok[k] = 1;
      }
    }
  });

  // spatial box average over an L-long axial segment within each column
  const double dz = grid.z_spacing();
  const int half_px =
      std::max(0, static_cast<int>(std::lround(0.5 * cfg.l_window_wavelengths * wavelength / dz)));
  parallel_for(static_cast<std::size_t>(num_windows), threads, [&](std::size_t wi) {
    const int w = static_cast<int>(wi);
    for (int ixz = 0; ixz < np; ++ixz) {
      const int iz = ixz % nz;
      const int col = ixz - iz;
      double sum_ax = 0.0, sum_lat = 0.0;
      int count = 0;
      const int lo = std::max(0, iz - half_px);
      const int hi = std::min(nz - 1, iz + half_px);
      for (int jz = lo; jz <= hi; ++jz) {
        const std::size_t k = field.idx(w, col + jz);
        if (!ok[k]) continue;
        sum_ax += ax[k];
        sum_lat += lat[k];
        ++count;
      }
      const std::size_t k = field.idx(w, ixz);
      if (count == 0 || !ok[k]) continue;  // pixel itself must be estimable
      const double va = sum_ax / count;
      const double vl = sum_lat / count;
      field.axial[k] = static_cast<float>(va);
      field.lateral[k] = static_cast<float>(vl);
      field.magnitude[k] = static_cast<float>(std::hypot(va, vl));
      field.angle_deg[k] = wrap_angle_deg(std::atan2(vl, va) * 180.0 / kPi);
      field.valid[k] = 1;
    }
  });
  return field;
}

DirectionalLine directional_line(Vec2 pixel, double flow_angle_deg, double l_wavelengths,
                                 double spacing_wavelengths, double wavelength,
                                 const ImagingGrid& grid) {
  DirectionalLine line;
  const int half = static_cast<int>(std::lround(0.5 * l_wavelengths / spacing_wavelengths));
  const int count = 2 * half + 1;
  line.spacing_m = spacing_wavelengths * wavelength;
  const double a = deg2rad(flow_angle_deg);
  const double dx = std::sin(a) * line.spacing_m;  // angle measured from the axial axis
  const double dz = std::cos(a) * line.spacing_m;
  line.points.x.resize(static_cast<std::size_t>(count));
  line.points.z.resize(static_cast<std::size_t>(count));
  line.inside.resize(static_cast<std::size_t>(count));
  const double x_lo = grid.x_coords.front(), x_hi = grid.x_coords.back();
  const double z_lo = grid.z_coords.front(), z_hi = grid.z_coords.back();
  for (int k = -half; k <= half; ++k) {
    const int i = k + half;
    line.points.x[i] = pixel.x + k * dx;
    line.points.z[i] = pixel.z + k * dz;
    line.inside[i] = line.points.x[i] >= x_lo && line.points.x[i] <= x_hi &&
                     line.points.z[i] >= z_lo && line.points.z[i] <= z_hi;
  }
  return line;
}

std::vector<double> dcc_estimate(std::span<const DirectionalSignals> streams,
                                 double prf_effective, int lag, const EstimatorConfig& cfg,
                                 double sample_spacing_m) {
  if (lag < 1) throw std::invalid_argument("dcc_estimate: lag must be >= 1");
  if (streams.empty()) throw std::invalid_argument("dcc_estimate: no streams");
  const int nf = streams[0].num_frames;
  const int npts = streams[0].num_points;
  for (const auto& s : streams)
    if (s.num_frames != nf || s.num_points != npts)
      throw std::invalid_argument("dcc_estimate: streams must share dimensions");
  const int max_shift = std::min(cfg.dcc_max_shift_samples, npts / 2 - 1);
  if (max_shift < 1 || npts < 8)
    throw std::invalid_argument("dcc_estimate: line too short for correlation support");
  const int win = std::max(lag + 1, static_cast<int>(std::lround(cfg.k_window_s * prf_effective)));
  const int num_windows = nf / win;
  std::vector<double> velocity(static_cast<std::size_t>(std::max(num_windows, 0)), kNaN);

  const int ns = 2 * max_shift + 1;
  std::vector<double> corr(static_cast<std::size_t>(ns));
  std::vector<double> a(static_cast<std::size_t>(npts)), b(static_cast<std::size_t>(npts));

  for (int w = 0; w < num_windows; ++w) {
    double v_sum = 0.0;
    int v_count = 0;
    for (const auto& stream : streams) {
      std::fill(corr.begin(), corr.end(), 0.0);
      int pairs = 0;
      for (int f = w * win; f + lag < std::min((w + 1) * win, nf); ++f) {
        // mean-removed copies of both lines
        double ma = 0.0, mb = 0.0;
        for (int k = 0; k < npts; ++k) {
          a[k] = stream.at(f, k);
          b[k] = stream.at(f + lag, k);
          ma += a[k];
          mb += b[k];
        }
        ma /= npts;
        mb /= npts;
        double ea = 0.0, eb = 0.0;
        for (int k = 0; k < npts; ++k) {
          a[k] -= ma;
          b[k] -= mb;
          ea += a[k] * a[k];
          eb += b[k] * b[k];
        }
        if (ea <= 0.0 || eb <= 0.0) continue;  // flat line: nothing to track
        // prefix sums for per-overlap energy normalization (keeps an exact
        // shift's correlation peak at exactly 1 and symmetric around it)
        std::vector<double> pa(npts + 1, 0.0), pb(npts + 1, 0.0);
        for (int k = 0; k < npts; ++k) {
          pa[k + 1] = pa[k] + a[k] * a[k];
          pb[k + 1] = pb[k] + b[k] * b[k];
        }
        for (int s = -max_shift; s <= max_shift; ++s) {
          double acc = 0.0;
          const int k_lo = std::max(0, -s);
          const int k_hi = std::min(npts, npts - s);
          for (int k = k_lo; k < k_hi; ++k) acc += a[k] * b[k + s];
          const double e_a = pa[k_hi] - pa[k_lo];
          const double e_b = pb[k_hi + s] - pb[k_lo + s];
          if (e_a > 0.0 && e_b > 0.0) corr[s + max_shift] += acc / std::sqrt(e_a * e_b);
        }
        ++pairs;
      }
      if (pairs == 0) continue;
      // peak with 3-point parabolic refinement
      int peak = 0;
      for (int s = 1; s < ns; ++s)
        if (corr[s] > corr[peak]) peak = s;
      double shift = peak - max_shift;
      if (peak > 0 && peak < ns - 1) {
        const double denom = corr[peak - 1] - 2.0 * corr[peak] + corr[peak + 1];
        if (denom < 0.0) shift += 0.5 * (corr[peak - 1] - corr[peak + 1]) / denom;
      }
      v_sum += shift * sample_spacing_m * prf_effective / lag;
      ++v_count;
    }
    if (v_count > 0) velocity[w] = v_sum / v_count;
  }
  return velocity;
}

}  // namespace nlhr
