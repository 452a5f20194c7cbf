// SPDX-License-Identifier: Apache-2.0
#include "nlhr/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "nlhr/errors.hpp"
#include "nlhr/parallel.hpp"
#include "nlhr/rng.hpp"
#include "nlhr/signal.hpp"

namespace nlhr {

namespace {
constexpr double kPi = std::numbers::pi;
double deg2rad(double d) { return d * kPi / 180.0; }
}  // namespace

Vec2 PhantomRegion::to_local(Vec2 p) const {
  const double a = deg2rad(axis_deg);
  const double dx = p.x - center.x;
  const double dz = p.z - center.z;
  return {dx * std::cos(a) + dz * std::sin(a), -dx * std::sin(a) + dz * std::cos(a)};
}

Vec2 PhantomRegion::from_local(Vec2 lp) const {
  const double a = deg2rad(axis_deg);
  return {center.x + lp.x * std::cos(a) - lp.z * std::sin(a),
          center.z + lp.x * std::sin(a) + lp.z * std::cos(a)};
}

bool PhantomRegion::contains(Vec2 p) const {
  Vec2 lp = to_local(p);
  return std::abs(lp.x) <= half_length && std::abs(lp.z) <= half_width;
}

PhantomRegion vessel_region(const ParabolicVessel& vessel, double lateral_extent,
                            double segment_scale) {
  PhantomRegion r;
  r.center = {0.0, vessel.center_depth};
  r.axis_deg = vessel.inclination_deg;
  const double c = std::cos(deg2rad(vessel.inclination_deg));
  r.half_length = 0.5 * segment_scale * lateral_extent / std::max(std::abs(c), 0.5);
  r.half_width = vessel.radius;
  return r;
}

Vec2 flow_velocity_at(const FlowFieldSpec& spec, Vec2 point) {
  return std::visit(
      [&](const auto& s) -> Vec2 {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ParabolicVessel>) {
          const double a = deg2rad(s.inclination_deg);
          // perpendicular distance from the axis through (0, center_depth)
          const double r = -(point.x) * std::sin(a) + (point.z - s.center_depth) * std::cos(a);
          if (std::abs(r) > s.radius) return {0.0, 0.0};
          const double speed = s.peak_velocity * (1.0 - (r * r) / (s.radius * s.radius));
          return {speed * std::cos(a), speed * std::sin(a)};
        } else if constexpr (std::is_same_v<T, RotatingDisk>) {
          const double dx = point.x - s.center_x;
          const double dz = point.z - s.center_z;
          if (dx * dx + dz * dz > s.radius * s.radius) return {0.0, 0.0};
          return {-s.angular_velocity * dz, s.angular_velocity * dx};
        } else {
          const double a = deg2rad(s.angle_deg);
          return {s.speed * std::cos(a), s.speed * std::sin(a)};
        }
      },
      spec);
}

ScattererField seed_scatterers(const PhantomRegion& region, double density_per_lambda3,
                               double wavelength, std::uint64_t seed) {
  if (!(density_per_lambda3 > 0.0))
    throw ConfigError("seed_scatterers: density must be positive");
  if (!(region.area() > 0.0)) throw ConfigError("seed_scatterers: empty region");
  const double count_f = density_per_lambda3 * region.area() / (wavelength * wavelength);
  const auto count = static_cast<std::size_t>(std::llround(count_f));

  ScattererField f;
  f.rng_seed = seed;
  f.density_per_lambda3 = density_per_lambda3;
  f.region = region;
  f.x.resize(count);
  f.z.resize(count);
  f.amplitude.resize(count);
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const double along = rng.uniform(-region.half_length, region.half_length);
    const double perp = rng.uniform(-region.half_width, region.half_width);
    Vec2 p = region.from_local({along, perp});
    f.x[i] = p.x;
    f.z[i] = p.z;
    f.amplitude[i] = rng.normal();
  }
  return f;
}

ScattererField advance_scatterers(const ScattererField& field, const FlowFieldSpec& spec,
                                  double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("advance_scatterers: dt must be positive");
  ScattererField out = field;
  const double span = 2.0 * field.region.half_length;
  for (std::size_t i = 0; i < out.size(); ++i) {
    Vec2 v = flow_velocity_at(spec, {out.x[i], out.z[i]});
    out.x[i] += v.x * dt;
    out.z[i] += v.z * dt;
    if (span > 0.0) {
      Vec2 lp = field.region.to_local({out.x[i], out.z[i]});
      if (std::abs(lp.x) > field.region.half_length) {
        lp.x -= span * std::floor((lp.x + field.region.half_length) / span);
        Vec2 p = field.region.from_local(lp);
        out.x[i] = p.x;
        out.z[i] = p.z;
      }
    }
  }
  return out;
}

void add_scatterer(ScattererField& field, Vec2 pos, double amplitude) {
  field.x.push_back(pos.x);
  field.z.push_back(pos.z);
  field.amplitude.push_back(amplitude);
}

std::vector<double> synth_pulse_from(std::span<const double> excitation,
                                     std::span<const double> impulse_response) {
  auto pulse = convolve(convolve(excitation, impulse_response), impulse_response);
  double peak = 0.0;
  for (double v : pulse) peak = std::max(peak, std::abs(v));
  if (peak > 0.0)
    for (double& v : pulse) v /= peak;
  return pulse;
}

std::vector<double> synth_pulse(const AcquisitionConfig& cfg) {
  const double fs = cfg.sampling_frequency;
  const double f0 = cfg.center_frequency;
  const int n_exc = static_cast<int>(std::lround(cfg.num_tx_cycles * fs / f0));
  const int n_imp = static_cast<int>(std::lround(fs / f0));
  std::vector<double> exc(static_cast<std::size_t>(n_exc));
  for (int i = 0; i < n_exc; ++i) exc[i] = std::sin(2.0 * kPi * f0 * i / fs);
  std::vector<double> imp(static_cast<std::size_t>(n_imp));
  auto w = hanning(n_imp);
  for (int i = 0; i < n_imp; ++i) imp[i] = w[i] * std::sin(2.0 * kPi * f0 * i / fs);
  return synth_pulse_from(exc, imp);
}

namespace {

// Quantized fractional-delay kernels; rows are blended linearly so the
// effective delay stays continuous. Avoids per-scatterer Bessel evaluations.
class DelayKernelTable {
 public:
  DelayKernelTable(int num_taps, double beta) : num_taps_(num_taps) {
    rows_.resize(static_cast<std::size_t>(kSteps + 1) * num_taps);
    for (int s = 0; s <= kSteps; ++s) {
      auto taps = fractional_delay_taps(static_cast<double>(s) / kSteps, num_taps, beta);
      std::copy(taps.begin(), taps.end(), rows_.begin() + static_cast<std::size_t>(s) * num_taps);
    }
  }

  void eval(double frac, double* out) const {
    const double u = frac * kSteps;
    const int s0 = std::min(static_cast<int>(u), kSteps - 1);
    const double t = u - s0;
    const double* a = rows_.data() + static_cast<std::size_t>(s0) * num_taps_;
    const double* b = a + num_taps_;
    for (int k = 0; k < num_taps_; ++k) out[k] = a[k] + t * (b[k] - a[k]);
  }

 private:
  static constexpr int kSteps = 1024;
  int num_taps_;
  std::vector<double> rows_;
};

}  // namespace

RFFrameSet simulate_rf(std::span<const ScattererField> trajectory, const TransducerArray& array,
                       const AcquisitionConfig& cfg, double max_depth, const SimOptions& opt) {
  validated(cfg);
  if (static_cast<int>(trajectory.size()) != cfg.num_frames)
    throw PipelineError("simulate_rf: trajectory length must equal num_frames");
  if (!(max_depth > 0.0)) throw ConfigError("simulate_rf: max_depth must be positive");

  const auto pulse = synth_pulse(cfg);
  const double fs = cfg.sampling_frequency;
  const double c = cfg.sound_speed;
  const int n_pulse = static_cast<int>(pulse.size());
  constexpr int kDelayTaps = 8;
  constexpr double kDelayBeta = 6.0;
  const DelayKernelTable kernels(kDelayTaps, kDelayBeta);
  // the pulse is centered on the arrival time so echo envelopes peak at tau
  const double pulse_center = 0.5 * (n_pulse - 1);

  RFFrameSet rf;
  rf.num_channels = array.num_elements;
  rf.num_samples =
      static_cast<int>(std::ceil(fs * 2.0 * max_depth / c)) + n_pulse + kDelayTaps;
  rf.num_frames = cfg.num_frames;
  rf.sampling_frequency = fs;
  rf.prf_effective = cfg.prf;
  rf.center_frequency = cfg.center_frequency;
  rf.sound_speed = c;
  rf.seed = trajectory.empty() ? 0 : trajectory.front().rng_seed;
  rf.allocate();

  parallel_for(static_cast<std::size_t>(cfg.num_frames), opt.threads, [&](std::size_t f) {
    const ScattererField& field = trajectory[f];
    std::vector<double> line(static_cast<std::size_t>(rf.num_samples));
    double taps[kDelayTaps];
    for (int i = 0; i < array.num_elements; ++i) {
      std::fill(line.begin(), line.end(), 0.0);
      const double xi = array.element_x[i];
      for (std::size_t s = 0; s < field.size(); ++s) {
        const double dx = xi - field.x[s];
        const double zs = field.z[s];
        const double dist = std::sqrt(dx * dx + zs * zs);
        const double tau = (zs + dist) / c;
        const double u = tau * fs - pulse_center;
        const int n0 = static_cast<int>(std::floor(u));
        if (n0 + 1 - kDelayTaps / 2 + n_pulse <= 0 || n0 - kDelayTaps / 2 + 2 >= rf.num_samples)
          continue;  // echo entirely outside the recorded window
        const double frac = u - n0;
        double amp = field.amplitude[s];
        if (opt.spread_1_over_r) amp /= std::max(dist, 1e-6);
        kernels.eval(frac, taps);
        for (int k = 0; k < kDelayTaps; ++k) {
          const double w = amp * taps[k];
          const int base = n0 + k - (kDelayTaps / 2 - 1);
          const int m_lo = std::max(0, -base);
          const int m_hi = std::min(n_pulse, rf.num_samples - base);
          for (int m = m_lo; m < m_hi; ++m) line[base + m] += w * pulse[m];
        }
      }
      for (int s = 0; s < rf.num_samples; ++s)
        rf.at(static_cast<int>(f), i, s) = static_cast<float>(line[s]);
    }
  });
  return rf;
}

}  // namespace nlhr
