// Acceptance suite: runs every release criterion at its stated tolerance and
// prints one pass/fail line per criterion.

#include <unistd.h>

#include <cstdarg>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "nlhr/beamforming.hpp"
#include "nlhr/clutter.hpp"
#include "nlhr/experiment.hpp"
#include "nlhr/metrics.hpp"
#include "nlhr/phantom.hpp"
#include "nlhr/rng.hpp"
#include "nlhr/velocity.hpp"
#include "support/oracles.hpp"

using namespace nlhr;
namespace fs = std::filesystem;
using std::numbers::pi;
using cd = std::complex<double>;

namespace {

struct Result {
  bool pass = false;
  std::string detail;
};

int g_failures = 0;

void report(int id, const std::string& name, const std::function<Result()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  Result r;
  try {
    r = fn();
  } catch (const std::exception& e) {
    r.pass = false;
    r.detail = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("criterion %2d %s (%6.1fs) %s: %s\n", id, r.pass ? "PASS" : "FAIL", secs,
              name.c_str(), r.detail.c_str());
  std::fflush(stdout);
  if (!r.pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

// ---------------------------------------------------------------- criterion 1
Result mas_algebraic_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(101);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform(0, 127));
    std::vector<double> a(n);
    for (double& v : a) v = rng.normal();
    const double closed = mas_beamform(a, MasMode::product);
    const double naive = oracle::naive_mas_product(a);
    const double rel = std::abs(closed - naive) / std::max(1e-30, std::abs(naive));
    worst = std::max(worst, rel);
  }
  const bool count_ok = multiplication_count(128) == 8128;
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool pass = worst < 1e-9 && count_ok && secs < 1.0;
  return {pass, fmt("worst rel err %.2e (<1e-9), M_128=%llu (=8128), %.2fs (<1s)", worst,
                    static_cast<unsigned long long>(multiplication_count(128)), secs)};
}

// ---------------------------------------------------------------- criterion 2
Result spectral_doubling() {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentSpec spec = desk_default_spec();
  const auto& cfg = spec.acquisition;
  const double f0 = cfg.center_frequency;
  const double lambda = cfg.wavelength();
  const auto array = spec.array();

  AcquisitionConfig acq = cfg;
  acq.num_frames = 1;
  ScattererField f;
  f.region.center = {0.0, 15e-3};
  f.region.half_length = 1e-3;
  f.region.half_width = 1e-3;
  add_scatterer(f, {0.0, 15e-3}, 1.0);
  std::vector<ScattererField> traj{f};
  auto rf = simulate_rf(traj, array, acq, 19e-3);
  rf = resample_rf(rf, 2, 1);

  const auto grid = make_grid(0.0, 0.0, 1.0, 12e-3, 18e-3, lambda / 16.0);
  const auto pts = points_from_grid(grid);
  const double axial_fs = acq.sound_speed / (2.0 * grid.z_spacing());
  const int nz = grid.num_z();

  auto mean_centroid = [&](const SubApertureEnsemble& ens) {
    double acc = 0.0;
    int cubes = 0;
    for (std::size_t a = 0; a < ens.alpha_deg.size(); ++a)
      for (const auto* data : {&ens.left, &ens.right}) {
        std::vector<double> col(nz);
        for (int k = 0; k < nz; ++k) col[k] = (*data)[ens.idx(static_cast<int>(a), 0, k)];
        acc += oracle::spectral_centroid_hz(col, axial_fs);
        ++cubes;
      }
    return acc / cubes;
  };

  const auto das = beamform_ensemble(rf, array, acq, pts, BeamformerKind::das);
  auto nlhr = beamform_ensemble(rf, array, acq, pts, BeamformerKind::nlhr);
  nlhr = bandpass_2f0(nlhr, acq, grid);

  const double c_das = mean_centroid(das);
  const double c_nlhr = mean_centroid(nlhr);
  const double das_err = std::abs(c_das - f0) / f0;
  const double nlhr_err = std::abs(c_nlhr - 2.0 * f0) / (2.0 * f0);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool pass = das_err < 0.10 && nlhr_err < 0.10 && secs < 30.0;
  return {pass, fmt("das centroid %.2f MHz vs f0 %.1f (err %.1f%%), nlhr %.2f MHz vs 2f0 %.1f "
                    "(err %.1f%%), %.1fs (<30s)",
                    c_das / 1e6, f0 / 1e6, 100 * das_err, c_nlhr / 1e6, 2 * f0 / 1e6,
                    100 * nlhr_err, secs)};
}

// ---------------------------------------------------------------- criterion 3
Result kasai_sweep() {
  const double prf = 20e3;
  double worst = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double fd = 0.45 * prf * k / 100.0;
    std::vector<cd> y(48);
    for (int i = 0; i < 48; ++i) {
      const double ph = 2.0 * pi * fd * i / prf + 0.37;
      y[i] = {std::cos(ph), std::sin(ph)};
    }
    worst = std::max(worst, std::abs(kasai_frequency(y, prf) - fd) / prf);
  }
  std::vector<cd> alias(64);
  for (int i = 0; i < 64; ++i) {
    const double ph = 2.0 * pi * 0.6 * i;
    alias[i] = {std::cos(ph), std::sin(ph)};
  }
  const double f_alias = kasai_frequency(alias, prf);
  const bool wrap_ok = std::abs(f_alias + 0.4 * prf) / prf < 0.005;
  const bool pass = worst < 0.005 && wrap_ok;
  return {pass, fmt("worst |err|/prf %.2e (<5e-3); 0.6 prf aliases to %.3f prf (expect -0.4)",
                    worst, f_alias / prf)};
}

// ---------------------------------------------------------------- criterion 4
Result tac_round_trip() {
  const double c = 1540.0, fp = 10e6, alpha = 9.0;
  double worst_v = 0.0, worst_th = 0.0;
  for (double v = 0.05; v <= 0.5 + 1e-12; v += 0.05) {
    for (int th = 0; th < 360; th += 10) {
      const double thr = th * pi / 180.0;
      const double ax = v * std::cos(thr), lat = v * std::sin(thr);
      const double al = alpha * pi / 180.0;
      const double fl = fp / c * (ax * (1.0 + std::cos(al)) + lat * std::sin(al));
      const double fr = fp / c * (ax * (1.0 + std::cos(al)) - lat * std::sin(al));
      const auto vc = tac_estimate(fl, fr, alpha, fp, c);
      const double mag = std::hypot(vc.axial, vc.lateral);
      double ang = std::atan2(vc.lateral, vc.axial) * 180.0 / pi;
      double dth = ang - th;
      while (dth > 180.0) dth -= 360.0;
      while (dth <= -180.0) dth += 360.0;
      worst_v = std::max(worst_v, std::abs(mag - v) / v);
      worst_th = std::max(worst_th, std::abs(dth));
    }
  }
  const bool pass = worst_v < 1e-6 && worst_th < 1e-4;
  return {pass, fmt("worst |v| rel err %.2e (<1e-6), worst angle err %.2e deg (<1e-4)", worst_v,
                    worst_th)};
}

// ---------------------------------------------------------------- criterion 5
Result dcc_shift_recovery() {
  const double prf = 20e3;
  const double spacing = 0.1 * 0.308e-3;
  EstimatorConfig cfg;
  cfg.k_window_s = 0.8e-3;
  cfg.dcc_max_shift_samples = 8;
  Rng rng(55);
  double worst = 0.0;
  for (int trial = 0; trial < 25; ++trial) {
    const double d = rng.uniform(-3.0, 3.0);
    // band-limited line: random low-frequency sinusoids
    std::vector<double> amp(6), phs(6), frq(6);
    for (int h = 0; h < 6; ++h) {
      amp[h] = rng.uniform(0.5, 1.0);
      phs[h] = rng.uniform(0, 2 * pi);
      frq[h] = rng.uniform(0.02, 0.18);
    }
    DirectionalSignals sig;
    sig.num_frames = 16;
    sig.num_points = 151;
    sig.values.resize(static_cast<std::size_t>(16) * 151);
    for (int f = 0; f < 16; ++f)
      for (int k = 0; k < 151; ++k) {
        double acc = 0.0;
        for (int h = 0; h < 6; ++h)
          acc += amp[h] * std::cos(2.0 * pi * frq[h] * (k - d * f) + phs[h]);
        sig.values[static_cast<std::size_t>(f) * 151 + k] = acc;
      }
    const auto v = dcc_estimate(std::vector<DirectionalSignals>{sig}, prf, 1, cfg, spacing);
    const double shift = v.at(0) / (spacing * prf);
    worst = std::max(worst, std::abs(shift - d));
  }
  return {worst < 0.25, fmt("worst shift error %.3f samples (<0.25)", worst)};
}

// ------------------------------------------------------------ criteria 6 and 7
struct E2E {
  ProfileReport rep;
  double seconds;
};

E2E run_case(BeamformerKind kind, double inclination_deg, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentSpec spec = desk_default_spec();
  spec.beamformer = kind;
  std::get<ParabolicVessel>(spec.phantom).inclination_deg = inclination_deg;
  spec.seed = seed;
  RunOptions opt;
  opt.threads = 0;
  const RFFrameSet rf = stage_simulate(spec, opt);
  const SlowTimeEnsemble st = stage_beamform(spec, rf, opt);
  const VelocityField field = stage_estimate(spec, st, nullptr, opt);
  const ProfileReport rep = extract_profile(field, spec.phantom, spec.grid, 0.0);
  return {rep, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()};
}

Result test_case_1() {
  const auto das = run_case(BeamformerKind::das, 0.0, 17);
  const auto nlhr = run_case(BeamformerKind::nlhr, 0.0, 17);
  const double total = das.seconds + nlhr.seconds;
  const bool das_ok = das.rep.v_bias_pct_median <= 0.0 && das.rep.v_bias_pct_median >= -20.0 &&
                      das.rep.v_sd_pct_median <= 15.0;
  const bool nlhr_ok = nlhr.rep.v_bias_pct_median <= 0.0 &&
                       nlhr.rep.v_bias_pct_median >= -20.0 && nlhr.rep.v_sd_pct_median <= 15.0;
  const bool pass = das_ok && nlhr_ok && total < 300.0;
  return {pass, fmt("das bias %.1f%% sd %.1f%%; nlhr bias %.1f%% sd %.1f%% (bias in [-20,0], "
                    "sd<=15); %.0fs (<300s)",
                    das.rep.v_bias_pct_median, das.rep.v_sd_pct_median,
                    nlhr.rep.v_bias_pct_median, nlhr.rep.v_sd_pct_median, total)};
}

Result test_case_2() {
  bool pass = true;
  std::string detail;
  for (double incl : {-20.0, -10.0, 0.0, 10.0, 20.0}) {
    const auto r = run_case(BeamformerKind::nlhr, incl, 29);
    const bool ok = std::abs(r.rep.a_bias_deg_median) <= 10.0 && r.rep.a_sd_deg_median <= 15.0;
    pass = pass && ok;
    detail += fmt("%+.0f:%+.1f/%.1f ", incl, r.rep.a_bias_deg_median, r.rep.a_sd_deg_median);
  }
  return {pass, "incl:A_Bias/A_SD deg (|bias|<=10, sd<=15) " + detail};
}

// ---------------------------------------------------------------- criterion 8
Result svd_clutter() {
  const int np = 96, nf = 64;
  CasoratiMatrix m;
  m.num_pixels = np;
  m.num_frames = nf;
  m.prf_effective = 20e3;
  m.values.assign(static_cast<std::size_t>(np) * nf, cd{0.0, 0.0});
  m.pixel_mask.assign(np, 1);
  Rng rng(71);
  std::vector<cd> u_c(np), u_f(np), v_c(nf), v_f(nf);
  double nc = 0.0, nfl = 0.0;
  for (int p = 0; p < np; ++p) {
    u_c[p] = {rng.normal(), rng.normal()};
    u_f[p] = {rng.normal(), rng.normal()};
    nc += std::norm(u_c[p]);
    nfl += std::norm(u_f[p]);
  }
  for (auto& x : u_c) x /= std::sqrt(nc);
  for (auto& x : u_f) x /= std::sqrt(nfl);
  for (int f = 0; f < nf; ++f) {
    v_c[f] = cd{1.0, 0.0} / std::sqrt(static_cast<double>(nf));
    const double ph = 2.0 * pi * 0.19 * f;
    v_f[f] = cd{std::cos(ph), std::sin(ph)} / std::sqrt(static_cast<double>(nf));
  }
  const double clutter_amp = 100.0;  // 40 dB above the flow component
  for (int p = 0; p < np; ++p)
    for (int f = 0; f < nf; ++f)
      m.at(p, f) = clutter_amp * u_c[p] * std::conj(v_c[f]) + u_f[p] * std::conj(v_f[f]);

  auto power_along = [&](const CasoratiMatrix& mat, const std::vector<cd>& u,
                         const std::vector<cd>& v) {
    cd acc = 0.0;
    for (int p = 0; p < np; ++p)
      for (int f = 0; f < nf; ++f) acc += std::conj(u[p] * std::conj(v[f])) * mat.at(p, f);
    return std::norm(acc);
  };

  const double clutter_before = power_along(m, u_c, v_c);
  const double flow_before = power_along(m, u_f, v_f);
  const auto filtered = svd_filter(m, 1);
  const double clutter_after = power_along(filtered, u_c, v_c);
  const double flow_after = power_along(filtered, u_f, v_f);
  const double suppression_db =
      10.0 * std::log10(clutter_before / std::max(clutter_after, 1e-300));
  const double flow_loss_db = std::abs(10.0 * std::log10(flow_before / flow_after));
  const bool pass = suppression_db >= 20.0 && flow_loss_db < 1.0;
  return {pass, fmt("clutter suppression %.1f dB (>=20), flow loss %.3f dB (<1)",
                    std::min(suppression_db, 999.0), flow_loss_db)};
}

// ---------------------------------------------------------------- criterion 9
std::vector<double> velocity_trace(const SlowTimeEnsemble& st, const ExperimentSpec& spec,
                                   int pixel, int win, int hop) {
  std::vector<double> trace;
  const int na = static_cast<int>(st.alpha_deg.size());
  std::vector<cd> seg(static_cast<std::size_t>(win));
  for (int start = 0; start + win <= st.num_frames; start += hop) {
    double sax = 0.0, slat = 0.0;
    int cnt = 0;
    for (int a = 0; a < na; ++a) {
      if (!st.left_valid[st.vidx(a, pixel)] || !st.right_valid[st.vidx(a, pixel)]) continue;
      auto kasai_side = [&](const std::vector<std::complex<float>>& data) {
        for (int i = 0; i < win; ++i) {
          const auto v = data[st.idx(a, pixel, start + i)];
          seg[i] = {static_cast<double>(v.real()), static_cast<double>(v.imag())};
        }
        return kasai_frequency(seg, st.prf_effective);
      };
      const double fl = kasai_side(st.left);
      const double fr = kasai_side(st.right);
      if (std::isnan(fl) || std::isnan(fr)) continue;
      const auto comp =
          tac_estimate(fl, fr, st.alpha_deg[a], st.carrier_hz, spec.acquisition.sound_speed);
      sax += comp.axial;
      slat += comp.lateral;
      ++cnt;
    }
    trace.push_back(cnt > 0 ? std::hypot(sax / cnt, slat / cnt) : 0.0);
  }
  return trace;
}

double trace_fwhm(const std::vector<double>& trace) {
  // deviation from the quiet baseline (median). A point scatterer sweeping
  // through the pixel's PSF perturbs the estimate before and after the
  // closest approach, so the transient is measured as the span between the
  // first and last half-peak crossings of the deviation.
  std::vector<double> sorted = trace;
  std::sort(sorted.begin(), sorted.end());
  const double base = sorted[sorted.size() / 2];
  std::vector<double> dev(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) dev[i] = std::abs(trace[i] - base);
  int peak = 0;
  for (std::size_t i = 0; i < dev.size(); ++i)
    if (dev[i] > dev[peak]) peak = static_cast<int>(i);
  const double half = 0.5 * dev[peak];
  const int n = static_cast<int>(dev.size());
  int first = peak, last = peak;
  for (int i = 0; i < n; ++i)
    if (dev[i] >= half) {
      first = i;
      break;
    }
  for (int i = n - 1; i >= 0; --i)
    if (dev[i] >= half) {
      last = i;
      break;
    }
  double left = first, right = last;
  if (first > 0) left = first - (dev[first] - half) / (dev[first] - dev[first - 1]);
  if (last < n - 1) right = last + (dev[last] - half) / (dev[last] - dev[last + 1]);
  return right - left;
}

Result bubble_transient() {
  ExperimentSpec spec = desk_default_spec();
  spec.bubble.enabled = true;
  spec.bubble.amplitude_scale = 20.0;
  spec.seed = 13;
  RunOptions opt;
  opt.threads = 0;

  // monitor the pixel the bubble traverses (on the vessel axis)
  const auto& vessel = std::get<ParabolicVessel>(spec.phantom);
  const double z_mon = vessel.center_depth;
  int iz = 0;
  for (int k = 1; k < spec.grid.num_z(); ++k)
    if (std::abs(spec.grid.z_coords[k] - z_mon) < std::abs(spec.grid.z_coords[iz] - z_mon))
      iz = k;
  const int pixel = spec.grid.pixel_index(spec.grid.num_x() / 2, iz);

  const RFFrameSet rf = stage_simulate(spec, opt);
  const int win = 16, hop = 2;

  spec.beamformer = BeamformerKind::das;
  const auto st_das = stage_beamform(spec, rf, opt);
  const auto tr_das = velocity_trace(st_das, spec, pixel, win, hop);
  spec.beamformer = BeamformerKind::nlhr;
  const auto st_nlhr = stage_beamform(spec, rf, opt);
  const auto tr_nlhr = velocity_trace(st_nlhr, spec, pixel, win, hop);

  const double w_das = trace_fwhm(tr_das);
  const double w_nlhr = trace_fwhm(tr_nlhr);
  const bool pass = w_nlhr <= w_das;
  return {pass, fmt("transient FWHM nlhr %.2f hops vs das %.2f hops (nlhr <= das)", w_nlhr,
                    w_das)};
}

// --------------------------------------------------------------- criterion 10
Result determinism() {
#ifndef NLHR_CLI_PATH
  return {false, "CLI not built"};
#else
  const fs::path tmp =
      fs::temp_directory_path() / ("nlhr_acc_det_" + std::to_string(::getpid()));
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  ExperimentSpec spec = desk_default_spec();
  const double lambda = spec.acquisition.wavelength();
  spec.acquisition.num_frames = 32;
  spec.grid = make_grid(-0.6e-3, 0.6e-3, 0.5 * lambda, 13.5e-3, 16.5e-3, lambda / 16.0);
  std::get<ParabolicVessel>(spec.phantom).radius = 1.4e-3;
  spec.estimator.l_window_wavelengths = 4.0;
  const fs::path cfg = tmp / "cfg.json";
  std::ofstream(cfg) << experiment_to_json_text(spec);

  auto run_once = [&](const std::string& out) {
    const std::string cmd = std::string(NLHR_CLI_PATH) + " run --config " + cfg.string() +
                            " --out " + out + " --deterministic > /dev/null 2>&1";
    return std::system(cmd.c_str());
  };
  if (run_once((tmp / "a").string()) != 0 || run_once((tmp / "b").string()) != 0) {
    fs::remove_all(tmp);
    return {false, "pipeline run failed"};
  }
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string ma = slurp(tmp / "a" / "manifest.json");
  const std::string mb = slurp(tmp / "b" / "manifest.json");
  const bool pass = !ma.empty() && ma == mb;
  fs::remove_all(tmp);
  return {pass, fmt("manifest bytes %zu, identical: %s", ma.size(), pass ? "yes" : "no")};
#endif
}

}  // namespace

int main() {
  std::printf("nlhrflow acceptance suite\n");
  report(1, "multiply-and-sum closed form", mas_algebraic_oracle);
  report(2, "spectral doubling of the nlhr line", spectral_doubling);
  report(3, "kasai estimator sweep", kasai_sweep);
  report(4, "tac forward/inverse round trip", tac_round_trip);
  report(5, "dcc fractional shift recovery", dcc_shift_recovery);
  report(6, "end-to-end transverse vessel (das+tac, nlhr+tac)", test_case_1);
  report(7, "end-to-end inclined vessels (nlhr+tac)", test_case_2);
  report(8, "svd clutter rejection on a constructed instance", svd_clutter);
  report(9, "bubble transient confinement (nlhr vs das)", bubble_transient);
  report(10, "deterministic reruns are byte-identical", determinism);
  if (g_failures > 0) {
    std::printf("%d criteria FAILED\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
