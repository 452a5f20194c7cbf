// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "nlhr/geometry.hpp"
#include "nlhr/rf_frameset.hpp"

namespace nlhr {

struct Vec2 {
  double x = 0.0;
  double z = 0.0;
};

/// Parabolic pipe flow: speed V_P * (1 - r^2/R^2) along the vessel axis for
/// r <= R, zero outside. The axis passes through (0, center_depth) at
/// `inclination_deg` from the lateral (x) axis.
struct ParabolicVessel {
  double center_depth = 0.0;    // [m]
  double radius = 0.0;          // R [m]
  double peak_velocity = 0.0;   // V_P [m/s]
  double inclination_deg = 0.0; // vessel-axis angle from the lateral axis [deg]
};

struct RotatingDisk {
  double center_x = 0.0;        // [m]
  double center_z = 0.0;        // [m]
  double radius = 0.0;          // [m]
  double angular_velocity = 0.0;// [rad/s]
};

struct UniformFlow {
  double speed = 0.0;           // [m/s]
  double angle_deg = 0.0;       // flow angle from the lateral axis [deg]
};

using FlowFieldSpec = std::variant<ParabolicVessel, RotatingDisk, UniformFlow>;

Vec2 flow_velocity_at(const FlowFieldSpec& spec, Vec2 point);

/// Rotated rectangular seeding region: |along| <= half_length along the axis,
/// |perp| <= half_width across it.
struct PhantomRegion {
  Vec2 center;
  double axis_deg = 0.0;
  double half_length = 0.0;
  double half_width = 0.0;

  double area() const { return 4.0 * half_length * half_width; }
  Vec2 to_local(Vec2 p) const;    // (along, perp)
  Vec2 from_local(Vec2 lp) const;
  bool contains(Vec2 p) const;
};

/// Vessel segment covering `segment_scale` times the lateral grid extent
/// (projected onto the axis), full lumen width.
PhantomRegion vessel_region(const ParabolicVessel& vessel, double lateral_extent,
                            double segment_scale = 1.5);

struct ScattererField {
  std::vector<double> x, z;        // [m]
  std::vector<double> amplitude;   // dimensionless reflectivity
  std::uint64_t rng_seed = 0;
  double density_per_lambda3 = 0.0;
  PhantomRegion region;

  std::size_t size() const { return x.size(); }
};

/// Uniform positions in the region, standard-normal amplitudes. The count is
/// round(density * area / wavelength^2): the elevation dimension is collapsed
/// to a slab one wavelength thick.
ScattererField seed_scatterers(const PhantomRegion& region, double density_per_lambda3,
                               double wavelength, std::uint64_t seed);

/// Euler step of every scatterer through the flow field. Scatterers leaving
/// the region along its axis wrap around periodically (constant density for
/// steady flow); the perpendicular offset is preserved.
ScattererField advance_scatterers(const ScattererField& field, const FlowFieldSpec& spec,
                                  double dt);

void add_scatterer(ScattererField& field, Vec2 pos, double amplitude);

/// Two-way pulse: num_tx_cycles-cycle sinusoid at f0 convolved twice with a
/// Hann-weighted single-cycle sinusoid (transmit and receive impulse
/// responses), peak-normalized.
std::vector<double> synth_pulse(const AcquisitionConfig& cfg);
std::vector<double> synth_pulse_from(std::span<const double> excitation,
                                     std::span<const double> impulse_response);

struct SimOptions {
  bool spread_1_over_r = false;  // 1/r receive amplitude falloff (off: unity spreading)
  int threads = 1;
};

/// Single-scattering pulse-echo synthesis for a non-steered plane-wave
/// transmit. For scatterer s and element i the echo arrives at
/// tau = (z_s + dist(element_i, s)) / c and is placed with an 8-tap
/// Kaiser-windowed-sinc fractional delay. One trajectory snapshot per frame.
RFFrameSet simulate_rf(std::span<const ScattererField> trajectory, const TransducerArray& array,
                       const AcquisitionConfig& cfg, double max_depth,
                       const SimOptions& opt = {});

}  // namespace nlhr
