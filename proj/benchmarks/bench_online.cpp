// Online phase only: schedules are built once outside the timed loop.
// Argument is the number of agents; p = 10, q = 1, T = 50.

#include <benchmark/benchmark.h>

#include <dmmse/baseline.hpp>
#include <dmmse/oedol.hpp>
#include <dmmse/oracle.hpp>
#include <dmmse/sdol.hpp>

namespace {

constexpr std::size_t kHorizon = 50;

struct Setup {
  explicit Setup(const benchmark::State& state)
      : model(dmmse::random_world(10, 1, static_cast<std::size_t>(state.range(0)),
                                  dmmse::folded_normal_stds(static_cast<std::size_t>(state.range(0)), 1.0, 5), 7)),
        trace(dmmse::sample_trace(model, kHorizon, 11)) {}
  dmmse::WorldModel model;
  dmmse::MeasurementTrace trace;
};

void BM_OdolRun(benchmark::State& state) {
  const Setup s(state);
  const auto schedule = dmmse::odol_schedule(dmmse::make_topology(dmmse::TopologyKind::random, s.model.agents(), 3),
                                             s.model, kHorizon);
  for (auto _ : state) benchmark::DoNotOptimize(dmmse::odol_run(schedule, s.trace));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kHorizon * s.model.agents()));
}
BENCHMARK(BM_OdolRun)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_OedolRun(benchmark::State& state) {
  const Setup s(state);
  const auto schedule = dmmse::oedol_schedule(dmmse::random_tree(s.model.agents(), 3), s.model, kHorizon);
  for (auto _ : state) benchmark::DoNotOptimize(dmmse::oedol_run(schedule, s.trace));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kHorizon * s.model.agents()));
}
BENCHMARK(BM_OedolRun)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_SdolRun(benchmark::State& state) {
  const Setup s(state);
  const auto w = dmmse::sdol_weights(dmmse::make_topology(dmmse::TopologyKind::random, s.model.agents(), 3), s.model, 10);
  for (auto _ : state) benchmark::DoNotOptimize(dmmse::sdol_run(w, s.trace));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kHorizon * s.model.agents()));
}
BENCHMARK(BM_SdolRun)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_DrlsRun(benchmark::State& state) {
  const Setup s(state);
  const auto topo = dmmse::make_topology(dmmse::TopologyKind::random, s.model.agents(), 3);
  const auto combiner = dmmse::relative_variance_combiner(topo, dmmse::noise_stds(s.model));
  for (auto _ : state) benchmark::DoNotOptimize(dmmse::drls_run(topo, s.model, combiner, s.trace));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kHorizon * s.model.agents()));
}
BENCHMARK(BM_DrlsRun)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
