#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "holon/nexmark.hpp"
#include "holon/runtime.hpp"
#include "holon/workloads.hpp"

namespace holon {

enum class DriverKind { sim, threaded };

DriverKind parse_driver(std::string_view name);
std::string_view to_string(DriverKind d);

// Times are ticks in the sim driver and seconds in the threaded driver.
// A missing restart_at is a crash.
struct FailureEvent {
  std::string node;
  double stop_at = 0;
  std::optional<double> restart_at;
};

enum class FailureKind { none, concurrent, subsequent, crash };

FailureKind parse_failure_kind(std::string_view name);
std::string_view to_string(FailureKind k);

// The failure shapes used in the evaluation: two nodes stopped together and
// restarted after a delay; two nodes stopped `gap` apart, each restarted
// after the delay; two nodes stopped together for good.
struct FailurePlan {
  FailureKind kind = FailureKind::none;
  std::vector<std::string> nodes;
  double at = 0;
  double restart_after = 0;
  double gap = 0;
};

std::vector<FailureEvent> expand(const FailurePlan& plan);

struct SimConfig {
  // Event-time milliseconds per tick; events are ingested at tick ts / tick_ms.
  std::uint64_t tick_ms = 10;
  std::uint64_t max_ticks = 1'000'000;
  // Broadcast frames become visible this many ticks after publication.
  std::uint64_t network_delay = 1;
  std::uint32_t steps_per_tick = 1;
};

struct ThreadedConfig {
  double max_seconds = 300;
  // Events per second across all partitions; 0 ingests as fast as possible.
  std::uint64_t ingest_rate = 0;
  std::uint64_t ingest_chunk = 1000;
  // Broadcast frames become visible this many milliseconds after publication.
  std::uint64_t network_delay_ms = 0;
};

struct ScenarioConfig {
  Workload workload = Workload::q7;
  DriverKind driver = DriverKind::sim;
  std::uint64_t seed = 1;
  nexmark::GeneratorConfig generator;
  // One entry per node, initial_partitions filled from the assignment.
  std::vector<NodeConfig> nodes;
  std::vector<FailureEvent> failures;
  SimConfig sim;
  ThreadedConfig threaded;
  bool measure_window_latency = true;
  // Also runs the failure-free baseline and reports latency sensitivity.
  bool compute_sensitivity = false;

  // Throws UsageError naming the first problem found.
  void validate() const;
  std::vector<PartitionId> partitions() const;
  WindowSpec window_spec() const { return WindowSpec(generator.window_length); }
};

// Nodes n0 .. n{count-1} with `defaults`, partitions dealt round-robin.
std::vector<NodeConfig> make_nodes(std::uint32_t count, const NodeConfig& defaults, std::uint32_t partitions);

// Reseeds the generator and every node's scheduler from one seed.
void apply_seed(ScenarioConfig& cfg, std::uint64_t seed);

ScenarioConfig parse_scenario(std::string_view yaml);
ScenarioConfig load_scenario(const std::filesystem::path& path);

}  // namespace holon
