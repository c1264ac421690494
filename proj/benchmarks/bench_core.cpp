#include <benchmark/benchmark.h>

#include "robgan/contamination.hpp"
#include "robgan/generator.hpp"
#include "robgan/mlp.hpp"
#include "robgan/objectives.hpp"
#include "robgan/trainer.hpp"

using namespace robgan;

namespace {

Matrix gaussian_batch(std::size_t m, std::size_t p, std::uint64_t seed) {
  Rng rng(seed);
  Matrix x(m, p);
  for (double& v : x.data()) v = rng.normal();
  return x;
}

Mlp disc(std::size_t p, std::size_t h) {
  Rng rng(1);
  const std::vector<std::size_t> hidden{h};
  return init_mlp(discriminator_spec(p, hidden, Activation::Sigmoid), InitScheme::Xavier, rng);
}

// args: p, hidden width; batch of 500
void BM_ForwardBatch(benchmark::State& state) {
  const auto p = static_cast<std::size_t>(state.range(0)), h = static_cast<std::size_t>(state.range(1));
  const Mlp d = disc(p, h);
  const Matrix x = gaussian_batch(500, p, 2);
  for (auto _ : state) benchmark::DoNotOptimize(d.forward_batch(x));
  state.SetItemsProcessed(state.iterations() * 500);
}
BENCHMARK(BM_ForwardBatch)->Args({10, 5})->Args({100, 20});

void BM_GradParams(benchmark::State& state) {
  const auto p = static_cast<std::size_t>(state.range(0)), h = static_cast<std::size_t>(state.range(1));
  const Mlp d = disc(p, h);
  const Matrix x = gaussian_batch(500, p, 3);
  const Vector up(500, 1.0 / 500);
  for (auto _ : state) benchmark::DoNotOptimize(grad_params(d, x, up));
  state.SetItemsProcessed(state.iterations() * 500);
}
BENCHMARK(BM_GradParams)->Args({10, 5})->Args({100, 20});

void BM_DiscriminatorGradient(benchmark::State& state) {
  const auto p = static_cast<std::size_t>(state.range(0));
  const Mlp d = disc(p, 20);
  const Matrix real = gaussian_batch(500, p, 4), fake = gaussian_batch(500, p, 5);
  ObjectiveKind kind;
  kind.divergence = state.range(1) ? Divergence::TV : Divergence::JS;
  for (auto _ : state) benchmark::DoNotOptimize(discriminator_gradient(d, BatchPair{real, fake}, kind, false));
}
BENCHMARK(BM_DiscriminatorGradient)->Args({10, 0})->Args({100, 0})->Args({100, 1});

void BM_GenSample(benchmark::State& state) {
  const auto p = static_cast<std::size_t>(state.range(0));
  Rng rng(6);
  const Generator g = LocationGen{Vector(p)};
  for (auto _ : state) benchmark::DoNotOptimize(gen_sample(g, rng, 500));
  state.SetItemsProcessed(state.iterations() * 500);
}
BENCHMARK(BM_GenSample)->Arg(10)->Arg(100);

void BM_GenGradElliptical(benchmark::State& state) {
  Rng rng(7);
  const std::vector<std::size_t> dims{48, 48, 32, 24, 12, 1};
  const Generator g = EllipticalGen{Vector(10), std::nullopt, make_radial_net(dims, InitScheme::Xavier, rng)};
  const Mlp d = disc(10, 5);
  const GenSample s = gen_sample(g, rng, 500);
  ObjectiveKind kind;
  for (auto _ : state) benchmark::DoNotOptimize(gen_grad(g, d, s.noise, kind));
}
BENCHMARK(BM_GenGradElliptical);

void BM_SampleContaminated(benchmark::State& state) {
  DatasetSpec spec;
  spec.p = static_cast<std::size_t>(state.range(0));
  spec.n = 5000;
  spec.eps = 0.2;
  spec.theta = Vector(spec.p);
  spec.q = CauchyIndep{Vector(spec.p, 0.5)};
  for (auto _ : state) {
    ++spec.seed;
    benchmark::DoNotOptimize(sample_contaminated(spec));
  }
}
BENCHMARK(BM_SampleContaminated)->Arg(10)->Arg(100);

// One full training run at desk scale; dominated by the discriminator steps.
void BM_TrainSmall(benchmark::State& state) {
  DatasetSpec spec;
  spec.p = 10;
  spec.n = 1000;
  spec.eps = 0.1;
  spec.theta = Vector(10);
  spec.q = GaussShift{Vector(10, 0.5)};
  const Dataset data = sample_contaminated(spec);
  const std::vector<std::size_t> structure{10, 5, 1};
  TrainConfig cfg = default_config(structure, 1000, Divergence::JS);
  cfg.epochs = 30;
  cfg.avg_epochs = 5;
  const Mlp d0 = init_discriminator(discriminator_spec(10, std::vector<std::size_t>{5}, Activation::Sigmoid), cfg);
  for (auto _ : state) benchmark::DoNotOptimize(train(data.x, d0, LocationGen{Vector(10)}, cfg));
}
BENCHMARK(BM_TrainSmall)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
