// Copyright 2026 The ccreg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Hot paths of training: network evaluation with spatial derivatives, the
// parameter backward pass, and whole epochs on a small phantom.
#include "ccreg/parallel.hpp"
#include "ccreg/phantom.hpp"
#include "ccreg/siren.hpp"
#include "ccreg/trainer.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace ccreg;

Coords random_coords(Eigen::Index n, std::uint64_t seed) {
  Rng rng(seed);
  Coords x(3, n);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1.0, 1.0);
  return x;
}

// args: order, batch size, width
void BM_EvalSpatial(benchmark::State& state) {
  const int order = static_cast<int>(state.range(0));
  const Eigen::Index n = state.range(1);
  Rng rng(1);
  const SirenParams p = init_siren({3, static_cast<int>(state.range(2)), 30.0}, rng);
  const Coords x = random_coords(n, 2);
  for (auto _ : state) {
    SpatialBatch b = eval_spatial(p, x, order);
    benchmark::DoNotOptimize(b.phi.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_EvalSpatial)
    ->ArgNames({"order", "n", "width"})
    ->Args({0, 2000, 64})
    ->Args({1, 2000, 64})
    ->Args({2, 2000, 64})
    ->Args({2, 2000, 256})
    ->Unit(benchmark::kMillisecond);

void BM_ParamGradients(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  Rng rng(3);
  const SirenParams p = init_siren({3, static_cast<int>(state.range(1)), 30.0}, rng);
  const Coords x = random_coords(n, 4);
  SirenTape tape;
  const SpatialBatch ev = eval_spatial(p, x, 1, &tape);
  SpatialAdjoint adj = SpatialBatch::zeros(1, n);
  adj.phi.setConstant(1e-3);
  for (auto& d : adj.d1) d.setConstant(1e-3);
  for (auto _ : state) {
    SirenGradients g = param_gradients(p, tape, adj);
    benchmark::DoNotOptimize(g.layers[0].weight.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_ParamGradients)->ArgNames({"n", "width"})->Args({2000, 64})->Args({2000, 256})->Unit(
    benchmark::kMillisecond);

// One paired (or single) training epoch per iteration on a 32^3 phantom.
void BM_Epoch(benchmark::State& state) {
  PhantomSpec spec;
  spec.size = 32;
  spec.amplitude_mm = 2.0;
  static const Phantom ph = generate_phantom(spec);
  TrainConfig cfg;
  cfg.net = {3, 64, 30.0};
  cfg.batch_per_inr = static_cast<int>(state.range(0));
  cfg.cycle_enabled = state.range(1) != 0;
  cfg.epochs = 5;
  for (auto _ : state) {
    InrPair pair = cfg.cycle_enabled ? train_pair(ph.fixed, ph.moving, ph.mask, ph.mask, cfg)
                                     : train_single(ph.fixed, ph.moving, ph.mask, cfg);
    benchmark::DoNotOptimize(pair.final_loss.total);
  }
  state.SetItemsProcessed(state.iterations() * cfg.epochs);
  state.counters["epochs/s"] = benchmark::Counter(static_cast<double>(state.iterations() * cfg.epochs),
                                                  benchmark::Counter::kIsRate);
}
BENCHMARK(BM_Epoch)->ArgNames({"batch", "cycle"})->Args({2000, 1})->Args({2000, 0})->Unit(benchmark::kMillisecond);

}  // namespace

int main(int argc, char** argv) {
  ccreg::tune_allocator();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
