#include <benchmark/benchmark.h>

#include <vector>

#include "rgbt/cftrack.hpp"
#include "rgbt/fft.hpp"
#include "rgbt/synth.hpp"

using namespace rgbt;

static void BM_Fft2RoundTrip(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::vector<double> x(static_cast<std::size_t>(n) * n);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i % 17) * 0.1;
  for (auto _ : state) {
    const Spectrum s = fft2(x, n, n);
    benchmark::DoNotOptimize(ifft2_real(s, n, n));
  }
}
BENCHMARK(BM_Fft2RoundTrip)->Arg(32)->Arg(64)->Arg(128);

static void BM_CfRespond(benchmark::State& state) {
  const synth::Generated g = synth::generate(synth::preset("moving", 0), 1);
  const cf::CfState s = cf::cf_init(g.seq.rgb(0), g.seq.gt_rgb[0], cf::CfConfig{});
  const Image next = g.seq.rgb(1);
  const Point c = g.seq.gt_rgb[0].center();
  for (auto _ : state) benchmark::DoNotOptimize(cf::cf_respond(s, next, c));
}
BENCHMARK(BM_CfRespond)->Unit(benchmark::kMillisecond);

static void BM_CfUpdate(benchmark::State& state) {
  const synth::Generated g = synth::generate(synth::preset("moving", 0), 1);
  cf::CfState s = cf::cf_init(g.seq.rgb(0), g.seq.gt_rgb[0], cf::CfConfig{});
  const Image next = g.seq.rgb(1);
  for (auto _ : state) cf::cf_update(s, next, g.seq.gt_rgb[1]);
}
BENCHMARK(BM_CfUpdate)->Unit(benchmark::kMillisecond);
