// SPDX-License-Identifier: Apache-2.0
//
// nlhrflow: plane-wave vector flow imaging pipeline with a nonlinear
// multiply-and-sum beamformer and a delay-and-sum reference path.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "nlhr/errors.hpp"
#include "nlhr/experiment.hpp"

namespace fs = std::filesystem;
using namespace nlhr;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitPipeline = 3;

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> beamformer;
  std::optional<std::string> mas_mode;
  std::optional<std::string> estimator;
  std::optional<int> k_remove;
  int threads = 0;
  bool deterministic = false;
  std::string profile = "desk";
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config_path, "Experiment config (JSON)");
  cmd->add_option("--out", a.out_dir, "Output directory (overrides config)");
  cmd->add_option("--seed", a.seed, "Scatterer RNG seed (overrides config)");
  cmd->add_option("--beamformer", a.beamformer, "Beamformer: das | nlhr")
      ->check(CLI::IsMember({"das", "nlhr"}));
  cmd->add_option("--mas-mode", a.mas_mode,
                  "Multiply-and-sum mode: product (default, plain pairwise products) | "
                  "signed-sqrt (F-DMAS style sign(x)*sqrt(|x|) terms)")
      ->check(CLI::IsMember({"product", "signed-sqrt"}));
  cmd->add_option("--estimator", a.estimator, "Velocity estimator: tac | dcc")
      ->check(CLI::IsMember({"tac", "dcc"}));
  cmd->add_option("--k-remove", a.k_remove, "Singular components removed by the clutter filter");
  cmd->add_option("--threads", a.threads, "Worker threads (0 = hardware concurrency)");
  cmd->add_flag("--deterministic", a.deterministic,
                "Single-threaded reductions for byte-identical artifacts");
  cmd->add_option("--profile", a.profile, "Base parameter profile: desk | full")
      ->check(CLI::IsMember({"desk", "full"}));
}

ExperimentSpec spec_from(const CommonArgs& a) {
  ExperimentSpec spec;
  if (!a.config_path.empty()) {
    std::ifstream in(a.config_path);
    if (!in) throw ConfigError("cannot open config " + a.config_path);
    std::ostringstream ss;
    ss << in.rdbuf();
    spec = experiment_from_json_text(ss.str());
  } else {
    spec = a.profile == "full" ? full_scale_spec() : desk_default_spec();
  }
  if (!a.out_dir.empty()) spec.outputs = a.out_dir;
  if (a.seed) spec.seed = *a.seed;
  if (a.beamformer)
    spec.beamformer = *a.beamformer == "das" ? BeamformerKind::das : BeamformerKind::nlhr;
  if (a.mas_mode)
    spec.mas_mode = *a.mas_mode == "signed-sqrt" ? MasMode::signed_sqrt : MasMode::product;
  if (a.estimator)
    spec.estimator.estimator = *a.estimator == "dcc" ? EstimatorKind::dcc : EstimatorKind::tac;
  if (a.k_remove) spec.k_remove = *a.k_remove;
  return spec;
}

RunOptions options_from(const CommonArgs& a) {
  RunOptions opt;
  opt.threads = a.threads;
  opt.deterministic = a.deterministic;
  return opt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"High frame rate ultrasound vector flow imaging pipeline"};
  app.require_subcommand(1);

  CommonArgs args;

  auto* c_run = app.add_subcommand("run", "Full pipeline: simulate, beamform, estimate, evaluate");
  add_common(c_run, args);

  auto* c_sim = app.add_subcommand("simulate", "Synthesize RF channel data (rf.bin)");
  add_common(c_sim, args);

  auto* c_beam = app.add_subcommand("beamform", "Beamform persisted RF into slow-time ensembles");
  add_common(c_beam, args);
  std::string rf_path;
  c_beam->add_option("--rf", rf_path, "RF binary produced by `simulate` (default <out>/rf.bin)");

  auto* c_est = app.add_subcommand("estimate", "Estimate velocities from persisted ensembles");
  add_common(c_est, args);
  std::string ens_dir;
  c_est->add_option("--ens", ens_dir, "Ensemble directory (default <out>/ens)");
  std::string est_rf_path;
  c_est->add_option("--rf", est_rf_path, "RF binary (needed for the dcc estimator)");

  auto* c_eval = app.add_subcommand("evaluate", "Profile metrics from a persisted velocity field");
  add_common(c_eval, args);

  auto* c_sv = app.add_subcommand("sv-spectrum", "Singular spectrum CSV from persisted ensembles");
  add_common(c_sv, args);
  std::string sv_ens_dir;
  c_sv->add_option("--ens", sv_ens_dir, "Ensemble directory (default <out>/ens)");

  auto* c_sweep = app.add_subcommand("sweep", "Run once per value of a numeric config axis");
  add_common(c_sweep, args);
  std::string axis;
  std::vector<double> values;
  c_sweep->add_option("--axis", axis, "peak_velocity | inclination | k_window | L_window | k_remove | prf | num_frames | density | seed")
      ->required();
  c_sweep->add_option("--values", values, "Axis values")->required()->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentSpec spec = spec_from(args);
    RunOptions opt = options_from(args);
    const fs::path out(spec.outputs);

    if (c_run->parsed()) {
      Manifest m = run(spec, opt);
      std::cout << "wrote " << m.files.size() << " artifacts to " << spec.outputs << "\n";
    } else if (c_sim->parsed()) {
      fs::create_directories(out);
      RFFrameSet rf = stage_simulate(spec, opt);
      save_rf(rf, out / "rf.bin");
      std::cout << "wrote " << (out / "rf.bin").string() << " (" << rf.num_channels << "x"
                << rf.num_samples << "x" << rf.num_frames << ")\n";
    } else if (c_beam->parsed()) {
      fs::create_directories(out);
      const fs::path rf_file = rf_path.empty() ? out / "rf.bin" : fs::path(rf_path);
      RFFrameSet rf = load_rf(rf_file);
      SlowTimeEnsemble st = stage_beamform(spec, rf, opt);
      save_slowtime(st, out / "ens", "slowtime");
      std::cout << "wrote ensembles to " << (out / "ens").string() << "\n";
    } else if (c_est->parsed()) {
      fs::create_directories(out);
      const fs::path ed = ens_dir.empty() ? out / "ens" : fs::path(ens_dir);
      SlowTimeEnsemble st = load_slowtime(ed, "slowtime");
      stage_clutter(spec, st);
      std::optional<RFFrameSet> resampled;
      if (spec.estimator.estimator == EstimatorKind::dcc) {
        const fs::path rf_file = est_rf_path.empty() ? out / "rf.bin" : fs::path(est_rf_path);
        RFFrameSet rf = load_rf(rf_file);
        resampled = resample_rf(rf, spec.axial_resample, spec.temporal_resample,
                                opt.effective_threads());
      }
      VelocityField field =
          stage_estimate(spec, st, resampled ? &*resampled : nullptr, opt);
      save_velocity_field(field, spec.grid, out / "velocity.csv", out / "velocity.bin");
      std::cout << "wrote velocity field (" << field.num_windows << " windows)\n";
    } else if (c_eval->parsed()) {
      VelocityField field = load_velocity_field(out / "velocity.bin");
      stage_evaluate(spec, field, out);
      std::cout << "wrote " << (out / "metrics.json").string() << "\n";
    } else if (c_sv->parsed()) {
      const fs::path ed = sv_ens_dir.empty() ? out / "ens" : fs::path(sv_ens_dir);
      SlowTimeEnsemble st = load_slowtime(ed, "slowtime");
      fs::create_directories(out);
      write_sv_report_csv(out / "svspectrum.csv", sv_spectrum(st));
      std::cout << "wrote " << (out / "svspectrum.csv").string() << "\n";
    } else if (c_sweep->parsed()) {
      auto manifests = sweep(spec, axis, values, opt);
      std::cout << "swept " << axis << " over " << values.size() << " values ("
                << manifests.size() << " runs)\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const PipelineError& e) {
    std::cerr << "pipeline error: " << e.what() << "\n";
    return kExitPipeline;
  } catch (const std::exception& e) {
    std::cerr << "pipeline error: " << e.what() << "\n";
    return kExitPipeline;
  }
  return 0;
}
