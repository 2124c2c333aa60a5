#include <benchmark/benchmark.h>

#include "rgbt/mfnet.hpp"
#include "rgbt/nnet.hpp"
#include "rgbt/rng.hpp"

using namespace rgbt;

static void BM_Conv3x3(benchmark::State& state) {
  const int ch = static_cast<int>(state.range(0));
  nn::Conv2d conv(3, 3, ch, ch, 1, 1);
  nn::Tensor x(ch, 32, 32, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(conv.forward(x));
}
BENCHMARK(BM_Conv3x3)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_MfNetForward(benchmark::State& state) {
  fusion::MfNet net{fusion::MfNetConfig{}};
  Rng rng(1);
  Image a(net.patch(), net.patch(), 3), b(net.patch(), net.patch(), 3);
  for (auto& v : a.data) v = static_cast<float>(rng.uniform());
  for (auto& v : b.data) v = static_cast<float>(rng.uniform());
  for (auto _ : state) benchmark::DoNotOptimize(fusion::mfnet_forward(net, a, b, 25, 25));
}
BENCHMARK(BM_MfNetForward)->Unit(benchmark::kMillisecond);
