#include <benchmark/benchmark.h>

#include "rgbt/cme.hpp"
#include "rgbt/synth.hpp"

using namespace rgbt;

static void BM_HarrisDetect(benchmark::State& state) {
  const synth::Generated g = synth::generate(synth::preset("pan", 0), 1);
  const Image img = to_gray(g.seq.rgb(0));
  for (auto _ : state) benchmark::DoNotOptimize(cme::detect(img, 200));
}
BENCHMARK(BM_HarrisDetect)->Unit(benchmark::kMillisecond);

static void BM_CameraMotion(benchmark::State& state) {
  const synth::Generated g = synth::generate(synth::preset("pan", 0), 1);
  const Image a = g.seq.rgb(4), b = g.seq.rgb(5);
  for (auto _ : state) benchmark::DoNotOptimize(cme::estimate_camera_motion(a, b));
}
BENCHMARK(BM_CameraMotion)->Unit(benchmark::kMillisecond);
