// SPDX-License-Identifier: Apache-2.0
#include "nlhr/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include <nlohmann/json.hpp>

#include "nlhr/errors.hpp"
#include "nlhr/parallel.hpp"

namespace nlhr {

namespace {
constexpr double kPi = std::numbers::pi;

template <typename F>
auto stage_guard(const char* name, F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(name) + ": " + e.what());
  } catch (const PipelineError& e) {
    throw PipelineError(std::string(name) + ": " + e.what());
  } catch (const std::exception& e) {
    throw PipelineError(std::string(name) + ": " + e.what());
  }
}
}  // namespace

TransducerArray ExperimentSpec::array() const {
  const double p = pitch > 0.0 ? pitch : acquisition.wavelength();
  return build_array(num_elements, p);
}

int RunOptions::effective_threads() const {
  return deterministic ? 1 : resolve_threads(threads);
}

ExperimentSpec desk_default_spec() {
  ExperimentSpec s;
  s.num_elements = 64;
  s.acquisition.center_frequency = 5e6;
  s.acquisition.sampling_frequency = 20e6;
  s.acquisition.prf = 10e3;
  s.acquisition.sound_speed = 1540.0;
  s.acquisition.num_frames = 128;
  s.acquisition.num_tx_cycles = 5;
  // the desk vessel sits close to a full-width aperture; a moderate F-number
  // keeps the FWHM-rule receive windows from spanning the array and diluting
  // the left/right Doppler difference
  s.acquisition.f_number = 3.5;
  // the lateral component scales the Doppler split by 1/sin(alpha), so small
  // angles dominate the estimator variance at desk scale
  s.acquisition.alpha_deg = {9.0, 12.0, 15.0};
  const double lambda = s.acquisition.wavelength();  // 0.308 mm
  s.pitch = lambda;
  // lateral sampling at lambda/2; axial at lambda/16 so the 2 f0 band of the
  // multiply-and-sum output stays below the axial Nyquist rate
  s.grid = make_grid(-1.0e-3, 1.0e-3, 0.5 * lambda, 12.0e-3, 18.0e-3, lambda / 16.0);
  s.phantom = ParabolicVessel{15.0e-3, 2.5e-3, 0.25, 0.0};
  s.density_per_lambda3 = 2.0;
  s.estimator.k_window_s = 0.8e-3;
  s.estimator.l_window_wavelengths = 8.0;  // kept small relative to the desk vessel radius
  s.estimator.dcc_spacing_wavelengths = 0.1;
  s.seed = 1;
  return s;
}

ExperimentSpec full_scale_spec() {
  ExperimentSpec s = desk_default_spec();
  s.num_elements = 128;
  s.pitch = 0.1925e-3;
  s.acquisition.center_frequency = 8e6;
  s.acquisition.sampling_frequency = 100e6;
  s.acquisition.prf = 10e3;
  s.acquisition.num_frames = 128;
  s.acquisition.f_number = 1.25;
  s.acquisition.alpha_deg = {6.0, 9.0, 12.0, 15.0};
  const double lambda = s.acquisition.wavelength();
  s.grid = make_grid(-2.0e-3, 2.0e-3, 0.5 * lambda, 19.5e-3, 30.5e-3, lambda / 16.0);
  s.phantom = ParabolicVessel{25.0e-3, 5.0e-3, 0.5, 0.0};
  s.density_per_lambda3 = 10.0;
  s.estimator.l_window_wavelengths = 20.0;
  return s;
}

namespace {
using json = nlohmann::json;

FlowFieldSpec phantom_from_json(const json& j) {
  const std::string kind = j.value("kind", std::string("parabolic_vessel"));
  if (kind == "parabolic_vessel") {
    ParabolicVessel v;
    v.center_depth = j.value("center_depth", 15.0e-3);
    v.radius = j.value("radius", 2.5e-3);
    v.peak_velocity = j.value("peak_velocity", 0.25);
    v.inclination_deg = j.value("inclination", 0.0);
    return v;
  }
  if (kind == "rotating_disk") {
    RotatingDisk d;
    d.center_x = j.value("center_x", 0.0);
    d.center_z = j.value("center_z", 15.0e-3);
    d.radius = j.value("radius", 2.5e-3);
    d.angular_velocity = j.value("angular_velocity", 10.0);
    return d;
  }
  if (kind == "uniform_flow") {
    UniformFlow u;
    u.speed = j.value("speed", 0.25);
    u.angle_deg = j.value("angle", 0.0);
    return u;
  }
  throw ConfigError("phantom.kind: unknown kind '" + kind + "'");
}

json phantom_to_json(const FlowFieldSpec& spec) {
  json j;
  if (const auto* v = std::get_if<ParabolicVessel>(&spec)) {
    j["kind"] = "parabolic_vessel";
    j["center_depth"] = v->center_depth;
    j["radius"] = v->radius;
    j["peak_velocity"] = v->peak_velocity;
    j["inclination"] = v->inclination_deg;
  } else if (const auto* d = std::get_if<RotatingDisk>(&spec)) {
    j["kind"] = "rotating_disk";
    j["center_x"] = d->center_x;
    j["center_z"] = d->center_z;
    j["radius"] = d->radius;
    j["angular_velocity"] = d->angular_velocity;
  } else if (const auto* u = std::get_if<UniformFlow>(&spec)) {
    j["kind"] = "uniform_flow";
    j["speed"] = u->speed;
    j["angle"] = u->angle_deg;
  }
  return j;
}
}  // namespace

ExperimentSpec experiment_from_json_text(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ConfigError("experiment config: malformed JSON");
  ExperimentSpec s = j.value("profile", std::string("desk")) == "full" ? full_scale_spec()
                                                                        : desk_default_spec();
  if (j.contains("transducer")) {
    const auto& t = j.at("transducer");
    s.num_elements = t.value("num_elements", s.num_elements);
    s.pitch = t.value("pitch", s.pitch);
  }
  if (j.contains("acquisition")) {
    const auto& a = j.at("acquisition");
    auto& c = s.acquisition;
    c.center_frequency = a.value("center_frequency", c.center_frequency);
    c.sampling_frequency = a.value("sampling_frequency", c.sampling_frequency);
    c.prf = a.value("prf", c.prf);
    c.sound_speed = a.value("sound_speed", c.sound_speed);
    c.num_frames = a.value("num_frames", c.num_frames);
    c.num_tx_cycles = a.value("num_tx_cycles", c.num_tx_cycles);
    c.f_number = a.value("f_number", c.f_number);
    if (a.contains("alpha_set")) c.alpha_deg = a.at("alpha_set").get<std::vector<double>>();
  }
  if (j.contains("grid")) s.grid = grid_from_json_text(j.at("grid").dump());
  if (j.contains("phantom")) {
    const auto& p = j.at("phantom");
    s.phantom = phantom_from_json(p);
    s.density_per_lambda3 = p.value("density_per_lambda3", s.density_per_lambda3);
    s.segment_scale = p.value("segment_scale", s.segment_scale);
    if (p.contains("bubble")) {
      const auto& b = p.at("bubble");
      s.bubble.enabled = b.value("enabled", true);
      s.bubble.amplitude_scale = b.value("amplitude_scale", 20.0);
      if (b.contains("start_along_m")) s.bubble.start_along_m = b.at("start_along_m").get<double>();
    }
  }
  if (j.contains("beamformer"))
    s.beamformer = j.at("beamformer").get<std::string>() == "das" ? BeamformerKind::das
                                                                  : BeamformerKind::nlhr;
  if (j.contains("mas_mode"))
    s.mas_mode = j.at("mas_mode").get<std::string>() == "signed-sqrt" ? MasMode::signed_sqrt
                                                                      : MasMode::product;
  if (j.contains("clutter")) s.k_remove = j.at("clutter").value("k_remove", s.k_remove);
  if (j.contains("estimator")) {
    const auto& e = j.at("estimator");
    s.estimator.estimator = e.value("estimator", std::string("tac")) == "dcc"
                                ? EstimatorKind::dcc
                                : EstimatorKind::tac;
    s.estimator.k_window_s = e.value("k_window", s.estimator.k_window_s);
    s.estimator.l_window_wavelengths = e.value("l_window", s.estimator.l_window_wavelengths);
    s.estimator.dcc_spacing_wavelengths =
        e.value("dcc_spacing", s.estimator.dcc_spacing_wavelengths);
    s.estimator.dcc_lag_frames = e.value("dcc_lag", s.estimator.dcc_lag_frames);
    s.estimator.dcc_max_shift_samples =
        e.value("dcc_max_shift", s.estimator.dcc_max_shift_samples);
    if (e.contains("flow_angle")) s.dcc_flow_angle_deg = e.at("flow_angle").get<double>();
    s.dcc_max_positions = e.value("dcc_max_positions", s.dcc_max_positions);
  }
  s.outputs = j.value("outputs", s.outputs);
  s.seed = j.value("seed", s.seed);
  if (j.contains("resample")) {
    s.axial_resample = j.at("resample").value("axial", s.axial_resample);
    s.temporal_resample = j.at("resample").value("temporal", s.temporal_resample);
  }
  return s;
}

std::string experiment_to_json_text(const ExperimentSpec& s) {
  json j;
  j["transducer"] = {{"num_elements", s.num_elements}, {"pitch", s.pitch}};
  j["acquisition"] = json::parse(acquisition_to_json_text(s.acquisition));
  j["grid"] = {{"x_min", s.grid.x_coords.front()},
               {"x_max", s.grid.x_coords.back()},
               {"x_spacing", s.grid.x_spacing()},
               {"z_min", s.grid.z_coords.front()},
               {"z_max", s.grid.z_coords.back()},
               {"z_spacing", s.grid.z_spacing()}};
  json p = phantom_to_json(s.phantom);
  p["density_per_lambda3"] = s.density_per_lambda3;
  p["segment_scale"] = s.segment_scale;
  if (s.bubble.enabled) {
    json b;
    b["enabled"] = true;
    b["amplitude_scale"] = s.bubble.amplitude_scale;
    if (s.bubble.start_along_m) b["start_along_m"] = *s.bubble.start_along_m;
    p["bubble"] = b;
  }
  j["phantom"] = p;
  j["beamformer"] = s.beamformer == BeamformerKind::das ? "das" : "nlhr";
  j["mas_mode"] = s.mas_mode == MasMode::product ? "product" : "signed-sqrt";
  j["clutter"] = {{"k_remove", s.k_remove}};
  json e;
  e["estimator"] = s.estimator.estimator == EstimatorKind::tac ? "tac" : "dcc";
  e["k_window"] = s.estimator.k_window_s;
  e["l_window"] = s.estimator.l_window_wavelengths;
  e["dcc_spacing"] = s.estimator.dcc_spacing_wavelengths;
  e["dcc_lag"] = s.estimator.dcc_lag_frames;
  e["dcc_max_shift"] = s.estimator.dcc_max_shift_samples;
  e["dcc_max_positions"] = s.dcc_max_positions;
  if (s.dcc_flow_angle_deg) e["flow_angle"] = *s.dcc_flow_angle_deg;
  j["estimator"] = e;
  j["outputs"] = s.outputs;
  j["seed"] = s.seed;
  j["resample"] = {{"axial", s.axial_resample}, {"temporal", s.temporal_resample}};
  return j.dump(2);
}

double phantom_flow_angle_deg(const FlowFieldSpec& phantom) {
  double axis_deg = 0.0;
  if (const auto* v = std::get_if<ParabolicVessel>(&phantom))
    axis_deg = v->inclination_deg;
  else if (const auto* u = std::get_if<UniformFlow>(&phantom))
    axis_deg = u->angle_deg;
  else
    throw ConfigError("flow_angle: a rotating disk has no single flow direction; set it explicitly");
  const double a = axis_deg * kPi / 180.0;
  return std::atan2(std::cos(a), std::sin(a)) * 180.0 / kPi;
}

namespace {
PhantomRegion region_for(const ExperimentSpec& s) {
  const double lateral_extent = s.grid.x_coords.back() - s.grid.x_coords.front();
  if (const auto* v = std::get_if<ParabolicVessel>(&s.phantom))
    return vessel_region(*v, lateral_extent, s.segment_scale);
  if (const auto* d = std::get_if<RotatingDisk>(&s.phantom)) {
    PhantomRegion r;
    r.center = {d->center_x, d->center_z};
    r.axis_deg = 0.0;
    r.half_length = d->radius;
    r.half_width = d->radius;
    return r;
  }
  const auto* u = std::get_if<UniformFlow>(&s.phantom);
  PhantomRegion r;
  r.center = {0.5 * (s.grid.x_coords.front() + s.grid.x_coords.back()),
              0.5 * (s.grid.z_coords.front() + s.grid.z_coords.back())};
  r.axis_deg = u->angle_deg;
  const double extent = std::max(s.grid.x_coords.back() - s.grid.x_coords.front(),
                                 s.grid.z_coords.back() - s.grid.z_coords.front());
  r.half_length = 0.5 * s.segment_scale * extent;
  r.half_width =
      std::min(0.5 * s.segment_scale * extent, 0.5 * (r.center.z - 1e-4));  // keep z > 0
  return r;
}
}  // namespace

std::vector<ScattererField> build_trajectory(const ExperimentSpec& spec) {
  const PhantomRegion region = region_for(spec);
  ScattererField field = seed_scatterers(region, spec.density_per_lambda3,
                                         spec.acquisition.wavelength(), spec.seed);
  if (spec.bubble.enabled) {
    double along;
    if (spec.bubble.start_along_m) {
      along = *spec.bubble.start_along_m;
    } else {
      // place so the bubble crosses the region center mid-acquisition
      double peak = 0.0;
      if (const auto* v = std::get_if<ParabolicVessel>(&spec.phantom)) peak = v->peak_velocity;
      if (const auto* u = std::get_if<UniformFlow>(&spec.phantom)) peak = u->speed;
      const double t_half = 0.5 * spec.acquisition.num_frames / spec.acquisition.prf;
      along = -peak * t_half;
    }
    add_scatterer(field, region.from_local({along, 0.0}), spec.bubble.amplitude_scale);
  }
  std::vector<ScattererField> traj;
  traj.reserve(static_cast<std::size_t>(spec.acquisition.num_frames));
  traj.push_back(std::move(field));
  const double dt = 1.0 / spec.acquisition.prf;
  for (int f = 1; f < spec.acquisition.num_frames; ++f)
    traj.push_back(advance_scatterers(traj.back(), spec.phantom, dt));
  return traj;
}

RFFrameSet stage_simulate(const ExperimentSpec& spec, const RunOptions& opt) {
  return stage_guard("simulate", [&] {
    validated(spec.acquisition);
    const auto traj = build_trajectory(spec);
    const PhantomRegion region = region_for(spec);
    double max_z = spec.grid.z_coords.back();
    for (Vec2 corner : {Vec2{region.half_length, region.half_width},
                        Vec2{region.half_length, -region.half_width},
                        Vec2{-region.half_length, region.half_width},
                        Vec2{-region.half_length, -region.half_width}})
      max_z = std::max(max_z, region.from_local(corner).z);
    SimOptions sim_opt;
    sim_opt.threads = opt.effective_threads();
    RFFrameSet rf = simulate_rf(traj, spec.array(), spec.acquisition, max_z + 1.0e-3, sim_opt);
    rf.seed = spec.seed;
    return rf;
  });
}

SlowTimeEnsemble stage_beamform(const ExperimentSpec& spec, const RFFrameSet& rf,
                                const RunOptions& opt) {
  return stage_guard("beamform", [&] {
    const int threads = opt.effective_threads();
    RFFrameSet resampled = resample_rf(rf, spec.axial_resample, spec.temporal_resample, threads);
    const PixelPoints points = points_from_grid(spec.grid);
    SubApertureEnsemble ens = beamform_ensemble(resampled, spec.array(), spec.acquisition,
                                                points, spec.beamformer, spec.mas_mode, threads);
    if (spec.beamformer == BeamformerKind::nlhr)
      ens = bandpass_2f0(ens, spec.acquisition, spec.grid, threads);
    return to_slowtime_ensemble(ens, spec.grid, threads);
  });
}

void stage_clutter(const ExperimentSpec& spec, SlowTimeEnsemble& st) {
  stage_guard("clutter", [&] {
    if (spec.k_remove == 0) return 0;
    for (std::size_t a = 0; a < st.alpha_deg.size(); ++a)
      for (Side side : {Side::left, Side::right}) {
        CasoratiMatrix m = casorati_from_slowtime(st, static_cast<int>(a), side);
        m = svd_filter(m, spec.k_remove);
        casorati_to_slowtime(m, st, static_cast<int>(a), side);
      }
    return 0;
  });
}

std::vector<std::pair<std::string, SvdReport>> sv_spectrum(const SlowTimeEnsemble& st) {
  std::vector<std::pair<std::string, SvdReport>> reports;
  for (std::size_t a = 0; a < st.alpha_deg.size(); ++a)
    for (Side side : {Side::left, Side::right}) {
      char name[64];
      std::snprintf(name, sizeof(name), "%s_a%g_%s",
                    st.tag == BeamformerKind::nlhr ? "nlhr" : "das", st.alpha_deg[a],
                    side == Side::left ? "left" : "right");
      reports.emplace_back(name, sv_report(casorati_from_slowtime(st, static_cast<int>(a), side)));
    }
  return reports;
}

namespace {
VelocityField dcc_field(const ExperimentSpec& spec, const RFFrameSet& resampled,
                        const RunOptions& opt) {
  const ImagingGrid& grid = spec.grid;
  const double wavelength = spec.acquisition.wavelength();
  const double flow_angle = spec.dcc_flow_angle_deg ? *spec.dcc_flow_angle_deg
                                                    : phantom_flow_angle_deg(spec.phantom);
  const int threads = opt.effective_threads();
  const int nz = grid.num_z();
  const int nx = grid.num_x();
  const int ix = nx / 2;  // estimates along the central axial line
  const int step = std::max(1, (nz + spec.dcc_max_positions - 1) / spec.dcc_max_positions);

  const int win = std::max(spec.estimator.dcc_lag_frames + 1,
                           static_cast<int>(std::lround(spec.estimator.k_window_s *
                                                        resampled.prf_effective)));
  const int num_windows = resampled.num_frames / win;
  if (num_windows < 1) throw ConfigError("dcc: acquisition shorter than one k_window");

  VelocityField field;
  field.num_points = grid.num_pixels();
  field.num_windows = num_windows;
  field.window_time_s.resize(static_cast<std::size_t>(num_windows));
  for (int w = 0; w < num_windows; ++w)
    field.window_time_s[w] = (w + 0.5) * win / resampled.prf_effective;
  const std::size_t n = static_cast<std::size_t>(num_windows) * field.num_points;
  field.magnitude.assign(n, 0.0f);
  field.angle_deg.assign(n, 0.0f);
  field.axial.assign(n, 0.0f);
  field.lateral.assign(n, 0.0f);
  field.valid.assign(n, 0);

  const TransducerArray array = spec.array();
  const double fa = flow_angle * kPi / 180.0;

  for (int iz = 0; iz < nz; iz += step) {
    const int p = grid.pixel_index(ix, iz);
    Vec2 px{grid.pixel_x(p), grid.pixel_z(p)};
    DirectionalLine line =
        directional_line(px, flow_angle, spec.estimator.l_window_wavelengths,
                         spec.estimator.dcc_spacing_wavelengths, wavelength, grid);
    // trim to the largest symmetric run of in-region points
    int half_ok = 0;
    const int half = line.points.size() / 2;
    while (half_ok + 1 <= half && line.inside[half + half_ok + 1] &&
           line.inside[half - half_ok - 1])
      ++half_ok;
    if (2 * half_ok + 1 < 8) continue;
    PixelPoints pts;
    for (int k = half - half_ok; k <= half + half_ok; ++k) {
      pts.x.push_back(line.points.x[k]);
      pts.z.push_back(line.points.z[k]);
    }
    // the rotated line re-uses the beamformer; the DC hump of the
    // multiply-and-sum output is handled by mean removal inside the NCC
    SubApertureEnsemble ens = beamform_ensemble(resampled, array, spec.acquisition, pts,
                                                spec.beamformer, spec.mas_mode, threads);
    std::vector<DirectionalSignals> streams;
    for (std::size_t a = 0; a < ens.alpha_deg.size(); ++a)
      for (Side side : {Side::left, Side::right}) {
        const auto& valid = side == Side::left ? ens.left_valid : ens.right_valid;
        bool all_valid = true;
        for (int k = 0; k < ens.num_points; ++k)
          if (!valid[ens.vidx(static_cast<int>(a), k)]) {
            all_valid = false;
            break;
          }
        if (!all_valid) continue;
        DirectionalSignals sig;
        sig.num_frames = ens.num_frames;
        sig.num_points = ens.num_points;
        sig.values.resize(static_cast<std::size_t>(sig.num_frames) * sig.num_points);
        const auto& data = side == Side::left ? ens.left : ens.right;
        for (int f = 0; f < sig.num_frames; ++f)
          for (int k = 0; k < sig.num_points; ++k)
            sig.values[static_cast<std::size_t>(f) * sig.num_points + k] =
                data[ens.idx(static_cast<int>(a), f, k)];
        streams.push_back(std::move(sig));
      }
    if (streams.empty()) continue;
    const auto v = dcc_estimate(streams, resampled.prf_effective, spec.estimator.dcc_lag_frames,
                                spec.estimator, line.spacing_m);
    for (int w = 0; w < std::min<int>(num_windows, static_cast<int>(v.size())); ++w) {
      if (std::isnan(v[w])) continue;
      const std::size_t k = field.idx(w, p);
      field.magnitude[k] = static_cast<float>(std::abs(v[w]));
      double ang = flow_angle;
      if (v[w] < 0.0) ang = ang > 0.0 ? ang - 180.0 : ang + 180.0;
      field.angle_deg[k] = static_cast<float>(ang);
      field.axial[k] = static_cast<float>(v[w] * std::cos(fa));
      field.lateral[k] = static_cast<float>(v[w] * std::sin(fa));
      field.valid[k] = 1;
    }
  }
  return field;
}
}  // namespace

VelocityField stage_estimate(const ExperimentSpec& spec, const SlowTimeEnsemble& st,
                             const RFFrameSet* resampled_rf, const RunOptions& opt) {
  return stage_guard("estimate", [&] {
    if (spec.estimator.estimator == EstimatorKind::tac)
      return tac_field(st, spec.estimator, spec.grid, spec.acquisition.sound_speed,
                       opt.effective_threads());
    if (resampled_rf == nullptr)
      throw PipelineError("estimate: the dcc estimator needs the resampled RF data");
    return dcc_field(spec, *resampled_rf, opt);
  });
}

void stage_evaluate(const ExperimentSpec& spec, const VelocityField& field,
                    const std::filesystem::path& out_dir) {
  stage_guard("evaluate", [&] {
    nlohmann::json mj;
    mj["beamformer"] = spec.beamformer == BeamformerKind::das ? "das" : "nlhr";
    mj["estimator"] = spec.estimator.estimator == EstimatorKind::tac ? "tac" : "dcc";
    if (std::holds_alternative<ParabolicVessel>(spec.phantom)) {
      const ProfileReport rep = extract_profile(field, spec.phantom, spec.grid, 0.0);
      CsvWriter csv(out_dir / "profile.csv",
                    {"r", "measured_v", "true_v", "measured_theta", "true_theta", "v_bias_pct",
                     "v_sd_pct", "a_bias_deg", "a_sd_deg"});
      for (int i = 0; i < rep.positions; ++i)
        csv.row({rep.radial_pos_m[i], rep.measured_v[i], rep.true_v[i],
                 rep.measured_angle_deg[i], rep.true_angle_deg[i], rep.v_bias_pct[i],
                 rep.v_sd_pct[i], rep.a_bias_deg[i], rep.a_sd_deg[i]});
      mj["median_bias"] = rep.v_bias_pct_median;
      mj["sd"] = rep.v_sd_pct_median;
      mj["a_bias"] = rep.a_bias_deg_median;
      mj["a_sd"] = rep.a_sd_deg_median;
      mj["n"] = rep.positions;
      mj["windows"] = rep.windows;
    } else {
      mj["note"] = "profile metrics need a parabolic vessel phantom";
    }
    std::ofstream mo(out_dir / "metrics.json");
    mo << mj.dump(2) << "\n";
    return 0;
  });
}

Manifest run(const ExperimentSpec& spec, const RunOptions& opt) {
  namespace fs = std::filesystem;
  const fs::path out_dir(spec.outputs);
  fs::create_directories(out_dir);

  validated(spec.acquisition);
  {
    auto gerrs = validate_grid(spec.grid);
    if (!gerrs.empty()) throw ConfigError("grid: " + gerrs.front());
    auto eerrs = validate_estimator(spec.estimator,
                                    spec.acquisition.prf * spec.temporal_resample);
    if (!eerrs.empty()) throw ConfigError("estimator: " + eerrs.front());
  }

  RFFrameSet rf = stage_simulate(spec, opt);
  stage_guard("simulate", [&] {
    save_rf(rf, out_dir / "rf.bin");
    return 0;
  });

  const int threads = opt.effective_threads();
  RFFrameSet resampled = stage_guard("beamform", [&] {
    return resample_rf(rf, spec.axial_resample, spec.temporal_resample, threads);
  });
  SlowTimeEnsemble st = stage_guard("beamform", [&] {
    const PixelPoints points = points_from_grid(spec.grid);
    SubApertureEnsemble ens = beamform_ensemble(resampled, spec.array(), spec.acquisition,
                                                points, spec.beamformer, spec.mas_mode, threads);
    if (spec.beamformer == BeamformerKind::nlhr)
      ens = bandpass_2f0(ens, spec.acquisition, spec.grid, threads);
    return to_slowtime_ensemble(ens, spec.grid, threads);
  });
  stage_guard("beamform", [&] {
    save_slowtime(st, out_dir / "ens", "slowtime");
    return 0;
  });

  stage_guard("sv-spectrum", [&] {
    write_sv_report_csv(out_dir / "svspectrum.csv", sv_spectrum(st));
    return 0;
  });

  stage_clutter(spec, st);

  VelocityField field = stage_estimate(spec, st, &resampled, opt);
  stage_guard("estimate", [&] {
    save_velocity_field(field, spec.grid, out_dir / "velocity.csv", out_dir / "velocity.bin");

    // time-mean components for heatmaps and the quiver export
    const int np = field.num_points;
    std::vector<float> mean_mag(np, 0.0f), mean_ang(np, 0.0f);
    std::vector<double> mean_ax(np, 0.0), mean_lat(np, 0.0);
    std::vector<std::uint8_t> any(np, 0);
    for (int p = 0; p < np; ++p) {
      double sax = 0.0, slat = 0.0;
      int cnt = 0;
      for (int w = 0; w < field.num_windows; ++w) {
        const std::size_t k = field.idx(w, p);
        if (!field.valid[k]) continue;
        sax += field.axial[k];
        slat += field.lateral[k];
        ++cnt;
      }
      if (cnt == 0) continue;
      any[p] = 1;
      mean_ax[p] = sax / cnt;
      mean_lat[p] = slat / cnt;
      mean_mag[p] = static_cast<float>(std::hypot(mean_ax[p], mean_lat[p]));
      mean_ang[p] = static_cast<float>(std::atan2(mean_lat[p], mean_ax[p]) * 180.0 / kPi);
    }
    float vmax = 0.0f;
    for (int p = 0; p < np; ++p) vmax = std::max(vmax, mean_mag[p]);
    write_pgm_heatmap(out_dir / "vmag.pgm", spec.grid.num_x(), spec.grid.num_z(), mean_mag, any,
                      0.0, vmax > 0.0f ? vmax : 1.0, "velocity magnitude [m/s]");
    write_pgm_heatmap(out_dir / "theta.pgm", spec.grid.num_x(), spec.grid.num_z(), mean_ang, any,
                      -180.0, 180.0, "flow angle [deg]");
    CsvWriter quiver(out_dir / "quiver.csv", {"x", "z", "vx", "vz"});
    for (int p = 0; p < np; ++p) {
      if (!any[p]) continue;
      quiver.row({spec.grid.pixel_x(p), spec.grid.pixel_z(p), mean_lat[p], mean_ax[p]});
    }
    return 0;
  });

  stage_evaluate(spec, field, out_dir);

  Manifest manifest;
  {
    // the echoed config identifies the experiment, not where it ran
    ExperimentSpec echo = spec;
    echo.outputs.clear();
    manifest.config_echo = experiment_to_json_text(echo);
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(out_dir))
    if (entry.is_regular_file() && entry.path().filename() != "manifest.json")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) manifest.files.push_back(manifest_entry(out_dir, f));
  write_manifest(manifest, out_dir / "manifest.json");
  return manifest;
}

namespace {
void apply_axis(ExperimentSpec& s, const std::string& axis, double value) {
  if (axis == "peak_velocity") {
    if (auto* v = std::get_if<ParabolicVessel>(&s.phantom)) {
      v->peak_velocity = value;
      return;
    }
    if (auto* u = std::get_if<UniformFlow>(&s.phantom)) {
      u->speed = value;
      return;
    }
    throw ConfigError("sweep: phantom has no peak_velocity");
  }
  if (axis == "inclination") {
    if (auto* v = std::get_if<ParabolicVessel>(&s.phantom)) {
      v->inclination_deg = value;
      return;
    }
    throw ConfigError("sweep: phantom has no inclination");
  }
  if (axis == "k_window") {
    s.estimator.k_window_s = value;
    return;
  }
  if (axis == "L_window") {
    s.estimator.l_window_wavelengths = value;
    return;
  }
  if (axis == "k_remove") {
    s.k_remove = static_cast<int>(std::lround(value));
    return;
  }
  if (axis == "seed") {
    s.seed = static_cast<std::uint64_t>(std::llround(value));
    return;
  }
  if (axis == "prf") {
    s.acquisition.prf = value;
    return;
  }
  if (axis == "num_frames") {
    s.acquisition.num_frames = static_cast<int>(std::lround(value));
    return;
  }
  if (axis == "density") {
    s.density_per_lambda3 = value;
    return;
  }
  throw ConfigError("sweep: unknown axis '" + axis + "'");
}
}  // namespace

std::vector<Manifest> sweep(const ExperimentSpec& spec_template, const std::string& axis,
                            const std::vector<double>& values, const RunOptions& opt) {
  if (values.empty()) throw ConfigError("sweep: no values given");
  namespace fs = std::filesystem;
  const fs::path root(spec_template.outputs);
  fs::create_directories(root);
  std::vector<Manifest> manifests;
  CsvWriter cmp(root / "sweep.csv",
                {axis, "v_bias_pct_median", "v_sd_pct_median", "a_bias_deg_median",
                 "a_sd_deg_median", "positions"});
  for (double value : values) {
    ExperimentSpec s = spec_template;
    apply_axis(s, axis, value);
    char sub[64];
    std::snprintf(sub, sizeof(sub), "%s=%g", axis.c_str(), value);
    s.outputs = (root / sub).string();
    manifests.push_back(run(s, opt));
    // pull the headline numbers back out of the run's metrics.json
    std::ifstream mi(fs::path(s.outputs) / "metrics.json");
    nlohmann::json mj = nlohmann::json::parse(mi, nullptr, false);
    if (!mj.is_discarded() && mj.contains("median_bias"))
      cmp.row({value, mj["median_bias"].get<double>(), mj["sd"].get<double>(),
               mj["a_bias"].get<double>(), mj["a_sd"].get<double>(),
               static_cast<double>(mj["n"].get<int>())});
    else
      cmp.row({value, 0.0, 0.0, 0.0, 0.0, 0.0});
  }
  return manifests;
}

}  // namespace nlhr
