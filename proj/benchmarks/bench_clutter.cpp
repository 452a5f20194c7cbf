// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <complex>
#include <vector>

#include "nlhr/clutter.hpp"
#include "nlhr/rng.hpp"
#include "nlhr/velocity.hpp"

using namespace nlhr;

namespace {
CasoratiMatrix random_matrix(int np, int nf, std::uint64_t seed) {
  CasoratiMatrix m;
  m.num_pixels = np;
  m.num_frames = nf;
  m.prf_effective = 20e3;
  m.values.resize(static_cast<std::size_t>(np) * nf);
  m.pixel_mask.assign(static_cast<std::size_t>(np), 1);
  Rng rng(seed);
  for (auto& v : m.values) v = {rng.normal(), rng.normal()};
  return m;
}
}  // namespace

static void BM_svd_filter(benchmark::State& state) {
  const auto m = random_matrix(static_cast<int>(state.range(0)),
                               static_cast<int>(state.range(1)), 11);
  for (auto _ : state) benchmark::DoNotOptimize(svd_filter(m, 4));
}
BENCHMARK(BM_svd_filter)->Args({1024, 64})->Args({4096, 128})->Args({4096, 256})
    ->Unit(benchmark::kMillisecond);

static void BM_sv_report(benchmark::State& state) {
  const auto m = random_matrix(2048, 128, 13);
  for (auto _ : state) benchmark::DoNotOptimize(sv_report(m));
}
BENCHMARK(BM_sv_report)->Unit(benchmark::kMillisecond);

static void BM_kasai(benchmark::State& state) {
  Rng rng(17);
  std::vector<std::complex<double>> y(static_cast<std::size_t>(state.range(0)));
  for (auto& v : y) v = {rng.normal(), rng.normal()};
  for (auto _ : state) benchmark::DoNotOptimize(kasai_frequency(y, 20e3));
}
BENCHMARK(BM_kasai)->Arg(16)->Arg(64)->Arg(256);
