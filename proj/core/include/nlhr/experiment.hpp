// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nlhr/beamforming.hpp"
#include "nlhr/clutter.hpp"
#include "nlhr/geometry.hpp"
#include "nlhr/io.hpp"
#include "nlhr/metrics.hpp"
#include "nlhr/phantom.hpp"
#include "nlhr/velocity.hpp"

namespace nlhr {

/// Transient stimulus: one scatterer injected on the vessel axis with an
/// amplitude of `amplitude_scale` times the background RMS, advected by the
/// flow like any other scatterer.
struct BubbleSpec {
  bool enabled = false;
  double amplitude_scale = 20.0;
  std::optional<double> start_along_m;  // along-axis offset at frame 0
};

struct ExperimentSpec {
  int num_elements = 64;
  double pitch = 0.0;  // 0 = one wavelength
  AcquisitionConfig acquisition;
  ImagingGrid grid;
  FlowFieldSpec phantom;
  double density_per_lambda3 = 2.0;
  double segment_scale = 1.5;
  BubbleSpec bubble;
  BeamformerKind beamformer = BeamformerKind::nlhr;
  MasMode mas_mode = MasMode::product;
  int k_remove = 0;
  EstimatorConfig estimator;
  std::optional<double> dcc_flow_angle_deg;  // default: the phantom's flow direction
  int dcc_max_positions = 33;
  std::string outputs = "out";
  std::uint64_t seed = 1;
  int axial_resample = 2;
  int temporal_resample = 2;

  TransducerArray array() const;
};

/// CI-sized profile; estimator converges but a full run stays in seconds.
ExperimentSpec desk_default_spec();
/// Full-scale simulation profile (128 elements, 100 MHz sampling). Slow.
ExperimentSpec full_scale_spec();

/// Parses a JSON experiment description; absent keys keep the desk defaults.
ExperimentSpec experiment_from_json_text(const std::string& text);
std::string experiment_to_json_text(const ExperimentSpec& spec);

struct RunOptions {
  int threads = 0;            // 0 = hardware concurrency
  bool deterministic = false; // force single-threaded reductions
  int effective_threads() const;
};

// Pipeline stages; `run` chains them and persists every artifact.
std::vector<ScattererField> build_trajectory(const ExperimentSpec& spec);
RFFrameSet stage_simulate(const ExperimentSpec& spec, const RunOptions& opt);
SlowTimeEnsemble stage_beamform(const ExperimentSpec& spec, const RFFrameSet& rf,
                                const RunOptions& opt);
void stage_clutter(const ExperimentSpec& spec, SlowTimeEnsemble& st);
VelocityField stage_estimate(const ExperimentSpec& spec, const SlowTimeEnsemble& st,
                             const RFFrameSet* resampled_rf, const RunOptions& opt);
void stage_evaluate(const ExperimentSpec& spec, const VelocityField& field,
                    const std::filesystem::path& out_dir);
std::vector<std::pair<std::string, SvdReport>> sv_spectrum(const SlowTimeEnsemble& st);

/// Flow direction used for DCC lines and truth angles, in the estimator's
/// convention (degrees from the axial axis, positive toward +x).
double phantom_flow_angle_deg(const FlowFieldSpec& phantom);

Manifest run(const ExperimentSpec& spec, const RunOptions& opt);

/// One run per value of the named numeric axis (e.g. "peak_velocity",
/// "inclination", "k_window", "L_window", "k_remove", "seed"), plus an
/// aggregated comparison CSV in the output root.
std::vector<Manifest> sweep(const ExperimentSpec& spec_template, const std::string& axis,
                            const std::vector<double>& values, const RunOptions& opt);

}  // namespace nlhr
