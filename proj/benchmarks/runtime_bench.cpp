#include <benchmark/benchmark.h>

#include "holon/harness.hpp"
#include "holon/scenario.hpp"

using namespace holon;

namespace {

// Events per second of wall time through the sim driver, failure free.
void BM_SimThroughput(benchmark::State& state) {
  ScenarioConfig cfg;
  cfg.workload = static_cast<Workload>(state.range(0));
  cfg.generator.partitions = 4;
  cfg.generator.events_per_partition = 5000;
  cfg.generator.events_per_second = 4000;
  cfg.nodes = make_nodes(4, NodeConfig{}, cfg.generator.partitions);
  apply_seed(cfg, 1);
  const auto log = nexmark::generate(cfg.generator);
  std::uint64_t events = 0;
  for (auto _ : state) {
    SimulatedDeployment d(cfg, log);
    d.run();
    events += d.result().events_generated;
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(events));
  state.SetLabel(std::string(to_string(cfg.workload)));
}
BENCHMARK(BM_SimThroughput)
    ->Arg(static_cast<int>(Workload::q1))
    ->Arg(static_cast<int>(Workload::q4))
    ->Arg(static_cast<int>(Workload::q7))
    ->Unit(benchmark::kMillisecond);

void BM_SequentialOracle(benchmark::State& state) {
  nexmark::GeneratorConfig gen;
  gen.partitions = 4;
  gen.events_per_partition = 25'000;
  gen.events_per_second = 10'000;
  const auto log = nexmark::generate(gen);
  for (auto _ : state) benchmark::DoNotOptimize(sequential_oracle(Workload::q7, log, WindowSpec(1000)));
  state.SetItemsProcessed(state.iterations() * 100'000);
}
BENCHMARK(BM_SequentialOracle)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
