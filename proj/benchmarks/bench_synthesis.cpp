// Offline weight synthesis. Arguments are {agents, p}.

#include <benchmark/benchmark.h>

#include <dmmse/disclosure.hpp>
#include <dmmse/oedol.hpp>
#include <dmmse/oracle.hpp>
#include <dmmse/sdol.hpp>

namespace {

constexpr std::size_t kHorizon = 20;

dmmse::WorldModel world(const benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  return dmmse::random_world(static_cast<std::size_t>(state.range(1)), 1, m, dmmse::folded_normal_stds(m, 1.0, 5), 7);
}

void BM_OdolSchedule(benchmark::State& state) {
  const auto model = world(state);
  const auto topo = dmmse::make_topology(dmmse::TopologyKind::random, model.agents(), 3);
  for (auto _ : state) benchmark::DoNotOptimize(dmmse::odol_schedule(topo, model, kHorizon));
}
BENCHMARK(BM_OdolSchedule)->Args({8, 3})->Args({20, 10})->Args({40, 10})->Unit(benchmark::kMillisecond);

void BM_OedolSchedule(benchmark::State& state) {
  const auto model = world(state);
  const auto tree = dmmse::random_tree(model.agents(), 3);
  for (auto _ : state) benchmark::DoNotOptimize(dmmse::oedol_schedule(tree, model, kHorizon));
}
BENCHMARK(BM_OedolSchedule)->Args({8, 3})->Args({20, 10})->Args({40, 10})->Unit(benchmark::kMillisecond);

void BM_SdolWeights(benchmark::State& state) {
  const auto model = world(state);
  const auto topo = dmmse::make_topology(dmmse::TopologyKind::random, model.agents(), 3);
  for (auto _ : state) benchmark::DoNotOptimize(dmmse::sdol_weights(topo, model, 10));
}
BENCHMARK(BM_SdolWeights)->Args({8, 3})->Args({20, 10})->Args({40, 10})->Unit(benchmark::kMillisecond);

void BM_SpanSufficiency(benchmark::State& state) {
  const auto model = world(state);
  const auto topo = dmmse::make_topology(dmmse::TopologyKind::cycle, model.agents());
  for (auto _ : state) benchmark::DoNotOptimize(dmmse::span_sufficiency(topo, model, 0, 5));
}
BENCHMARK(BM_SpanSufficiency)->Args({8, 3})->Args({20, 10})->Unit(benchmark::kMillisecond);

}  // namespace
