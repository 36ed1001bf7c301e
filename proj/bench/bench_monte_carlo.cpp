#include <benchmark/benchmark.h>
#include <omp.h>

#include "dd2/sim.h"

namespace {

std::shared_ptr<const dd2::Scenario> demo() {
  static auto s = std::make_shared<const dd2::Scenario>(
      dd2::load_scenario_file(std::filesystem::path(DD2_SOURCE_DIR) / "scenarios/demo.json"));
  return s;
}

template <auto Runner>
void run(benchmark::State& state, const dd2::Policy& policy) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    auto results = Runner(demo(), policy, n, 0, {});
    benchmark::DoNotOptimize(results.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
  state.counters["threads"] = omp_get_max_threads();
}

void BM_serial_random(benchmark::State& s) { run<dd2::run_batch_serial>(s, dd2::random_legal_policy()); }
void BM_parallel_random(benchmark::State& s) { run<dd2::run_batch_parallel>(s, dd2::random_legal_policy()); }
void BM_serial_cheapest(benchmark::State& s) { run<dd2::run_batch_serial>(s, dd2::cheapest_first_policy()); }
void BM_parallel_cheapest(benchmark::State& s) { run<dd2::run_batch_parallel>(s, dd2::cheapest_first_policy()); }

}  // namespace

BENCHMARK(BM_serial_random)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_parallel_random)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_serial_cheapest)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_parallel_cheapest)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
