// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "nlhr/beamforming.hpp"
#include "nlhr/phantom.hpp"
#include "nlhr/rng.hpp"
#include "nlhr/signal.hpp"

using namespace nlhr;

namespace {
std::vector<double> random_channels(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> a(static_cast<std::size_t>(n));
  for (double& v : a) v = rng.normal();
  return a;
}

double naive_mas(const std::vector<double>& a) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) acc += a[i] * a[j];
  return acc;
}

AcquisitionConfig bench_cfg() {
  AcquisitionConfig cfg;
  cfg.center_frequency = 5e6;
  cfg.sampling_frequency = 40e6;
  cfg.prf = 10e3;
  cfg.sound_speed = 1540.0;
  cfg.num_frames = 1;
  cfg.num_tx_cycles = 5;
  cfg.f_number = 3.5;
  cfg.alpha_deg = {9.0, 12.0, 15.0};
  return cfg;
}
}  // namespace

static void BM_mas_closed_form(benchmark::State& state) {
  const auto a = random_channels(static_cast<int>(state.range(0)), 7);
  for (auto _ : state) benchmark::DoNotOptimize(mas_beamform(a, MasMode::product));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_mas_closed_form)->RangeMultiplier(2)->Range(16, 128)->Complexity();

static void BM_mas_pairwise_loop(benchmark::State& state) {
  const auto a = random_channels(static_cast<int>(state.range(0)), 7);
  for (auto _ : state) benchmark::DoNotOptimize(naive_mas(a));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_mas_pairwise_loop)->RangeMultiplier(2)->Range(16, 128)->Complexity();

static void BM_das(benchmark::State& state) {
  const auto a = random_channels(128, 7);
  for (auto _ : state) benchmark::DoNotOptimize(das_beamform(a));
}
BENCHMARK(BM_das);

static void BM_delay_table(benchmark::State& state) {
  const auto cfg = bench_cfg();
  const auto array = build_array(64, cfg.wavelength());
  const auto grid = make_grid(-1e-3, 1e-3, 0.5 * cfg.wavelength(), 12e-3, 18e-3,
                              cfg.wavelength() / 16.0);
  for (auto _ : state) benchmark::DoNotOptimize(compute_delays(array, grid, cfg.sound_speed));
}
BENCHMARK(BM_delay_table);

static void BM_beamform_frame(benchmark::State& state) {
  // one-frame receive chain on a desk-scale column block
  auto cfg = bench_cfg();
  const auto array = build_array(64, cfg.wavelength());
  ScattererField f;
  f.region.center = {0.0, 15e-3};
  f.region.half_length = 2e-3;
  f.region.half_width = 2e-3;
  Rng rng(3);
  for (int i = 0; i < 64; ++i)
    add_scatterer(f, {rng.uniform(-2e-3, 2e-3), 15e-3 + rng.uniform(-2e-3, 2e-3)}, rng.normal());
  std::vector<ScattererField> traj{f};
  auto rf = simulate_rf(traj, array, cfg, 19e-3);
  rf = resample_rf(rf, 2, 1);
  const auto grid = make_grid(-0.5e-3, 0.5e-3, 0.5 * cfg.wavelength(), 13e-3, 17e-3,
                              cfg.wavelength() / 16.0);
  const auto pts = points_from_grid(grid);
  for (auto _ : state) {
    auto ens = beamform_ensemble(rf, array, cfg, pts, BeamformerKind::nlhr);
    benchmark::DoNotOptimize(ens.left.data());
  }
  state.counters["pixels"] = static_cast<double>(pts.size());
}
BENCHMARK(BM_beamform_frame)->Unit(benchmark::kMillisecond);

static void BM_bandpass_fir(benchmark::State& state) {
  const auto taps = design_bandpass_fir(7.5e6, 12.5e6, 40e6, 40.0, 5e6);
  std::vector<double> x(512);
  Rng rng(5);
  for (double& v : x) v = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(filtfilt_reflect(x, taps));
}
BENCHMARK(BM_bandpass_fir);

static void BM_analytic_signal(benchmark::State& state) {
  std::vector<double> x(static_cast<std::size_t>(state.range(0)));
  Rng rng(6);
  for (double& v : x) v = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(analytic_signal(x));
}
BENCHMARK(BM_analytic_signal)->Arg(256)->Arg(512)->Arg(1024);

BENCHMARK_MAIN();
