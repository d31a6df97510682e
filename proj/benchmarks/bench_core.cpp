#include <cstdint>
#include <vector>

#include <benchmark/benchmark.h>

#include "bicex/baselines.hpp"
#include "bicex/bic.hpp"
#include "bicex/environment.hpp"
#include "bicex/model.hpp"
#include "bicex/priors.hpp"
#include "bicex/rng.hpp"

namespace {

using namespace bicex;

PriorModel gaussian_prior() {
  return PriorModel({ArmMarginal::gaussian_prior(1.0, 1.0), ArmMarginal::gaussian_prior(0.5, 1.0)},
                    {RewardFamily{RewardFamily::Kind::gaussian, 1.0},
                     RewardFamily{RewardFamily::Kind::gaussian, 1.0}});
}

PriorModel grid_prior() {
  return PriorModel({ArmMarginal::grid_prior(0.0, 1.0, 64), ArmMarginal::grid_prior(0.0, 1.0, 64)},
                    std::vector<RewardFamily>(2));
}

void bench_rng_derive(benchmark::State& state) {
  std::uint64_t i = 0;
  for (auto _ : state) {
    RngStream rng = RngStream::derive(2024, i++, "bench", 0);
    benchmark::DoNotOptimize(rng.uniform());
  }
}
BENCHMARK(bench_rng_derive);

void bench_rng_uniform(benchmark::State& state) {
  RngStream rng = RngStream::derive(2024, 0, "bench", 0);
  for (auto _ : state) benchmark::DoNotOptimize(rng.uniform());
}
BENCHMARK(bench_rng_uniform);

void bench_posterior_gaussian(benchmark::State& state) {
  const PriorModel prior = gaussian_prior();
  Dataset data(2);
  RngStream rng = RngStream::derive(2024, 0, "bench", 1);
  for (int i = 0; i < 64; ++i) data.add(0, rng.uniform());
  for (auto _ : state) benchmark::DoNotOptimize(posterior_mean(prior, data, 0));
}
BENCHMARK(bench_posterior_gaussian);

void bench_posterior_grid(benchmark::State& state) {
  const PriorModel prior = grid_prior();
  Dataset data(2);
  RngStream rng = RngStream::derive(2024, 0, "bench", 2);
  for (int i = 0; i < 64; ++i) data.add(0, rng.uniform() < 0.6 ? 1.0 : 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(posterior_mean(prior, data, 0));
}
BENCHMARK(bench_posterior_grid);

void bench_two_arm_sampler(benchmark::State& state) {
  const PriorModel prior = gaussian_prior();
  const RunOptions quiet{false};
  std::uint64_t rep = 0;
  for (auto _ : state) {
    RngStream inst = RngStream::derive(2024, rep, "instance", 0);
    Environment env = make_environment(prior, inst);
    benchmark::DoNotOptimize(run_two_arm_sampler(prior, {1, 7}, env, 2024, rep, quiet));
    ++rep;
  }
  state.SetItemsProcessed(state.iterations() * 14);
}
BENCHMARK(bench_two_arm_sampler);

void bench_reduction_round(benchmark::State& state) {
  const PriorModel prior = gaussian_prior();
  const std::int64_t T = state.range(0);
  BanditSetup setup;
  setup.num_arms = 2;
  setup.horizon = T;
  const WrappedFactory factory = [setup](RngStream) { return make_bandit("ucb1", setup); };
  const RunOptions quiet{false};
  std::uint64_t rep = 0;
  for (auto _ : state) {
    RngStream inst = RngStream::derive(2024, rep, "instance", 0);
    Environment env = make_environment(prior, inst);
    benchmark::DoNotOptimize(
        run_black_box_reduction(prior, {1, 7, T}, factory, env, 2024, rep, quiet));
    ++rep;
  }
  state.SetItemsProcessed(state.iterations() * T);
}
BENCHMARK(bench_reduction_round)->Arg(256)->Arg(2048);

void bench_standalone_ucb1(benchmark::State& state) {
  const std::int64_t T = 1024;
  BanditSetup setup;
  setup.num_arms = 2;
  setup.horizon = T;
  const WrappedFactory factory = [setup](RngStream) { return make_bandit("ucb1", setup); };
  const Environment base{MabInstance{{0.7, 0.5}}, std::vector<RewardFamily>(2)};
  std::uint64_t rep = 0;
  for (auto _ : state) {
    Environment env = base;
    benchmark::DoNotOptimize(run_standalone_bandit(env, factory, T, 2024, rep++));
  }
  state.SetItemsProcessed(state.iterations() * T);
}
BENCHMARK(bench_standalone_ucb1);

}  // namespace

BENCHMARK_MAIN();
