// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "nlhr/geometry.hpp"
#include "nlhr/phantom.hpp"
#include "nlhr/velocity.hpp"

namespace nlhr {

struct BiasSd {
  double bias_pct = 0.0;  // mean(measured - truth) / v_peak * 100
  double sd_pct = 0.0;    // population std(measured) / v_peak * 100
};

BiasSd velocity_bias_sd(std::span<const double> measured, std::span<const double> truth,
                        double v_peak);

struct AngleBiasSd {
  double bias_deg = 0.0;  // wrap-aware mean deviation from truth
  double sd_deg = 0.0;    // population std of the wrapped deviations
};

AngleBiasSd angle_bias_sd(std::span<const double> measured_deg, double truth_deg);

/// Velocity/angle statistics along the axial line through a parabolic
/// vessel, restricted to the inner 90% of the radius. Per-position series
/// pool the repeated window estimates; the scalar summaries are medians over
/// positions.
struct ProfileReport {
  std::vector<double> radial_pos_m;       // signed perpendicular offset from the axis
  std::vector<double> measured_v;         // window-mean measured magnitude [m/s]
  std::vector<double> true_v;             // parabolic truth [m/s]
  std::vector<double> measured_angle_deg; // window-mean measured angle
  std::vector<double> true_angle_deg;
  std::vector<double> v_bias_pct;         // per position
  std::vector<double> v_sd_pct;
  std::vector<double> a_bias_deg;
  std::vector<double> a_sd_deg;
  double v_bias_pct_median = 0.0;
  double v_sd_pct_median = 0.0;
  double a_bias_deg_median = 0.0;
  double a_sd_deg_median = 0.0;
  int positions = 0;
  int windows = 0;
};

ProfileReport extract_profile(const VelocityField& field, const FlowFieldSpec& vessel,
                              const ImagingGrid& grid, double line_x = 0.0);

}  // namespace nlhr
