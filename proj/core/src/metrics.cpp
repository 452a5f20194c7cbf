// SPDX-License-Identifier: Apache-2.0
#include "nlhr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "nlhr/errors.hpp"

namespace nlhr {

namespace {
constexpr double kPi = std::numbers::pi;

double wrap_deg(double d) {
  while (d <= -180.0) d += 360.0;
  while (d > 180.0) d -= 360.0;
  return d;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}
}  // namespace

BiasSd velocity_bias_sd(std::span<const double> measured, std::span<const double> truth,
                        double v_peak) {
  if (measured.empty() || measured.size() != truth.size())
    throw std::invalid_argument("velocity_bias_sd: need equal-length non-empty inputs");
  if (!(v_peak > 0.0)) throw std::invalid_argument("velocity_bias_sd: v_peak must be positive");
  const double n = static_cast<double>(measured.size());
  double mean_err = 0.0, mean_m = 0.0;
  for (std::size_t i = 0; i < measured.size(); ++i) {
    mean_err += measured[i] - truth[i];
    mean_m += measured[i];
  }
  mean_err /= n;
  mean_m /= n;
  double var = 0.0;
  for (double m : measured) var += (m - mean_m) * (m - mean_m);
  var /= n;  // population definition
  return {mean_err / v_peak * 100.0, std::sqrt(var) / v_peak * 100.0};
}

AngleBiasSd angle_bias_sd(std::span<const double> measured_deg, double truth_deg) {
  if (measured_deg.empty()) throw std::invalid_argument("angle_bias_sd: empty input");
  const double n = static_cast<double>(measured_deg.size());
  double mean_dev = 0.0;
  std::vector<double> dev(measured_deg.size());
  for (std::size_t i = 0; i < measured_deg.size(); ++i) {
    dev[i] = wrap_deg(measured_deg[i] - truth_deg);
    mean_dev += dev[i];
  }
  mean_dev /= n;
  double var = 0.0;
  for (double d : dev) var += (d - mean_dev) * (d - mean_dev);
  var /= n;
  return {mean_dev, std::sqrt(var)};
}

ProfileReport extract_profile(const VelocityField& field, const FlowFieldSpec& vessel,
                              const ImagingGrid& grid, double line_x) {
  const auto* pv = std::get_if<ParabolicVessel>(&vessel);
  if (pv == nullptr)
    throw std::invalid_argument("extract_profile: vessel must be a parabolic vessel");
  if (line_x < grid.x_coords.front() - 0.5 * grid.x_spacing() ||
      line_x > grid.x_coords.back() + 0.5 * grid.x_spacing())
    throw ConfigError("extract_profile: line lies outside the imaging grid");
  if (field.num_points != grid.num_pixels())
    throw std::invalid_argument("extract_profile: field does not match grid");

  // nearest grid column to the requested axial line
  int ix = 0;
  double best = std::abs(grid.x_coords[0] - line_x);
  for (int i = 1; i < grid.num_x(); ++i) {
    const double d = std::abs(grid.x_coords[i] - line_x);
    if (d < best) {
      best = d;
      ix = i;
    }
  }

  const double incl = pv->inclination_deg * kPi / 180.0;
  const Vec2 flow_dir{std::cos(incl), std::sin(incl)};
  const double true_angle = wrap_deg(std::atan2(flow_dir.x, flow_dir.z) * 180.0 / kPi);

  ProfileReport rep;
  rep.windows = field.num_windows;
  const double x = grid.x_coords[ix];
  std::vector<double> m_v, m_a;
  for (int iz = 0; iz < grid.num_z(); ++iz) {
    const double z = grid.z_coords[iz];
    // signed perpendicular offset from the vessel axis through (0, center_depth)
    const double r = (z - pv->center_depth) * std::cos(incl) - x * std::sin(incl);
    if (std::abs(r) > 0.9 * pv->radius) continue;  // inner-90% mask
    const int p = grid.pixel_index(ix, iz);
    m_v.clear();
    m_a.clear();
    for (int w = 0; w < field.num_windows; ++w) {
      const std::size_t k = field.idx(w, p);
      if (!field.valid[k]) continue;
      m_v.push_back(field.magnitude[k]);
      m_a.push_back(field.angle_deg[k]);
    }
    if (m_v.empty()) continue;
    const double vt = pv->peak_velocity * (1.0 - (r * r) / (pv->radius * pv->radius));
    std::vector<double> vt_rep(m_v.size(), vt);
    const BiasSd vb = velocity_bias_sd(m_v, vt_rep, pv->peak_velocity);
    const AngleBiasSd ab = angle_bias_sd(m_a, true_angle);

    rep.radial_pos_m.push_back(r);
    double mean_v = 0.0;
    for (double v : m_v) mean_v += v;
    rep.measured_v.push_back(mean_v / static_cast<double>(m_v.size()));
    rep.true_v.push_back(vt);
    rep.measured_angle_deg.push_back(wrap_deg(true_angle + ab.bias_deg));
    rep.true_angle_deg.push_back(true_angle);
    rep.v_bias_pct.push_back(vb.bias_pct);
    rep.v_sd_pct.push_back(vb.sd_pct);
    rep.a_bias_deg.push_back(ab.bias_deg);
    rep.a_sd_deg.push_back(ab.sd_deg);
  }
  rep.positions = static_cast<int>(rep.radial_pos_m.size());
  rep.v_bias_pct_median = median(rep.v_bias_pct);
  rep.v_sd_pct_median = median(rep.v_sd_pct);
  rep.a_bias_deg_median = median(rep.a_bias_deg);
  rep.a_sd_deg_median = median(rep.a_sd_deg);
  return rep;
}

}  // namespace nlhr
