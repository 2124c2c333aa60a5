#include <benchmark/benchmark.h>

#include "rgbt/pipeline.hpp"
#include "rgbt/synth.hpp"

using namespace rgbt;

// per-frame cost with constant fusion, so the net is not part of the timing
static void BM_TrackerFrame(benchmark::State& state) {
  const synth::Generated g = synth::generate(synth::preset("mixed", 0), 1);
  TrackerConfig cfg;
  cfg.fusion = FusionMode::constant;
  Tracker tr(cfg);
  tr.init(g.seq.rgb(0), g.seq.thermal(0), g.seq.gt_t[0]);
  std::size_t t = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tr.track(g.seq.rgb(t), g.seq.thermal(t)));
    if (++t == g.seq.size()) {
      state.PauseTiming();
      tr.init(g.seq.rgb(0), g.seq.thermal(0), g.seq.gt_t[0]);
      t = 1;
      state.ResumeTiming();
    }
  }
}
BENCHMARK(BM_TrackerFrame)->Unit(benchmark::kMillisecond);
