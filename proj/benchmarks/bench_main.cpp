#include <benchmark/benchmark.h>

#include "setonet/datagen/darcy.hpp"
#include "setonet/datagen/diffraction.hpp"
#include "setonet/datagen/grf.hpp"
#include "setonet/datagen/transport.hpp"
#include "setonet/runtime.hpp"
#include "setonet/sources.hpp"
#include "setonet/training.hpp"

namespace setonet {
namespace {

void BM_BranchForward(benchmark::State& state) {
  retain_heap_memory();
  const auto variant = static_cast<BranchVariant>(state.range(0));
  const BenchmarkCard card = benchmark_card("derivative");
  Model model(default_model_config(card, variant), 0);
  PolySource src(card, 0, 0);
  Rng rng(1);
  const Batch batch = src.train_batch(rng, 64, ProtocolSpec{});
  for (auto _ : state) {
    Tape tape(false);
    benchmark::DoNotOptimize(model.branch().forward(tape, batch.sensors).coef);
  }
  state.SetLabel(to_string(variant));
}
BENCHMARK(BM_BranchForward)
    ->Arg(static_cast<int>(BranchVariant::key))
    ->Arg(static_cast<int>(BranchVariant::attention))
    ->Arg(static_cast<int>(BranchVariant::sum))
    ->Arg(static_cast<int>(BranchVariant::vidon))
    ->Unit(benchmark::kMillisecond);

void BM_TrainStep(benchmark::State& state) {
  retain_heap_memory();
  const BenchmarkCard card = benchmark_card("derivative");
  Model model(default_model_config(card, BranchVariant::key), 0);
  PolySource src(card, 0, 0);
  Adam adam;
  Rng rng(2);
  for (auto _ : state) {
    const Batch batch = src.train_batch(rng, 64, ProtocolSpec{});
    model.visit([](Param& p) { p.zero_grad(); });
    Tape tape;
    const NodeId loss = tape.mse(model.forward(tape, batch), batch.queries.targets);
    tape.backward(loss);
    clip_gradients(model, 1.0);
    adam.step(model, 5e-4);
  }
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMillisecond);

void BM_DarcySolve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  GrfSampler grf(uniform_grid(n, 0.0, 1.0), 0.04, 1.0);
  Rng rng(3);
  const Vec f = grf.sample(rng);
  for (auto _ : state) benchmark::DoNotOptimize(solve_darcy_1d(f).u.data());
}
BENCHMARK(BM_DarcySolve)->Arg(501)->Arg(1201)->Unit(benchmark::kMicrosecond);

void BM_Sinkhorn(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Vec grid = Vec::LinSpaced(n, -5.0, 5.0);
  Rng rng(4);
  const Mat a = grid_masses(sample_source_mixture(rng), grid);
  const Mat b = grid_masses(isotropic_gaussian(0.0, 0.0, 0.5), grid);
  for (auto _ : state) benchmark::DoNotOptimize(sinkhorn_log(a, b, grid, SinkhornOptions{}).f.data());
}
BENCHMARK(BM_Sinkhorn)->Arg(40)->Arg(80)->Unit(benchmark::kMillisecond);

void BM_SpectralPropagate(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  DiffractionParams p;
  p.grid = n;
  Rng rng(5);
  const Field f0 = initial_field(sample_bumps(rng, p), n, p.sigma_env);
  for (auto _ : state) {
    Field f = f0;
    propagate(f, n, p.t0);
    benchmark::DoNotOptimize(f.data());
  }
}
BENCHMARK(BM_SpectralPropagate)->Arg(128)->Unit(benchmark::kMicrosecond);

}  // namespace
}  // namespace setonet
