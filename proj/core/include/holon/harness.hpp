#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "holon/metrics.hpp"
#include "holon/nexmark.hpp"
#include "holon/runtime.hpp"
#include "holon/scenario.hpp"
#include "holon/stream_log.hpp"
#include "holon/workloads.hpp"

namespace holon {

struct RunResult {
  MetricsReport metrics;
  // Deduplicated output log per partition, rendered as output lines.
  OutputLines outputs;
  bool completed = false;
  // Driver time at which the run ended, in seconds.
  double elapsed_s = 0;
  std::uint64_t events_generated = 0;
  WindowIndex windows = 0;
  std::vector<std::string> diagnostics;
};

// Reads every partition of `output` through an OutputDeduplicator.
OutputLines collect_outputs(const LoggedTopic& output);

// Deterministic single-threaded deployment. Each tick: apply failures due
// now, ingest events with ts < (tick + 1) * tick_ms, then let every live
// node take steps_per_tick steps in node order.
class SimulatedDeployment {
 public:
  explicit SimulatedDeployment(const ScenarioConfig& cfg);
  SimulatedDeployment(const ScenarioConfig& cfg, nexmark::EventLog log);
  ~SimulatedDeployment();

  Clock now() const { return now_; }
  void step();
  // All input ingested, consumed, and every window emitted by every partition.
  bool finished() const;
  // Steps until finished or the horizon; returns finished().
  bool run();

  // Live node or nullptr while it is down.
  const Node* node(const std::string& id) const;
  std::vector<std::string> node_ids() const;
  // Highest global watermark any live replica of any WCRDT observes.
  std::optional<Timestamp> live_global_watermark() const;
  // Highest own watermark of partition p among live holders.
  std::optional<Timestamp> live_own_watermark(const PartitionId& p) const;

  const MetricsSink& metrics() const { return *sink_; }
  const LoggedTopic& output() const { return *output_; }
  const nexmark::EventLog& log() const { return log_; }
  RunResult result() const;

 private:
  struct Slot;

  void apply_failures();
  void ingest();

  ScenarioConfig cfg_;
  WindowSpec spec_;
  nexmark::EventLog log_;
  std::unique_ptr<Handler> handler_;
  std::unique_ptr<LoggedTopic> input_;
  std::unique_ptr<LoggedTopic> output_;
  std::unique_ptr<BroadcastTopic> broadcast_;
  std::unique_ptr<BroadcastTopic> control_;
  std::unique_ptr<CheckpointStore> store_;
  std::unique_ptr<Cluster> cluster_;
  std::unique_ptr<MetricsSink> sink_;
  std::vector<std::unique_ptr<Slot>> slots_;
  std::map<PartitionId, std::size_t> ingested_;
  std::map<PartitionId, std::uint64_t> end_;
  bool windowed_ = false;
  WindowIndex windows_ = 0;
  std::uint64_t events_ = 0;
  Clock now_ = 0;
};

// One worker thread per node plus an ingestion thread, over wall-clock time
// in milliseconds.
RunResult run_threaded(const ScenarioConfig& cfg, const nexmark::EventLog& log);

// Runs the configured driver; with compute_sensitivity also runs the
// failure-free baseline and fills metrics.sensitivity. Throws
// DeterminismViolation if two executions of a partition disagree.
RunResult run_scenario(const ScenarioConfig& cfg);
RunResult run_once(const ScenarioConfig& cfg);

// Latency sensitivity of `run` against `baseline`: both window curves
// resampled on the tick grid up to their last window end.
Sensitivity latency_sensitivity(const RunResult& run, const RunResult& baseline, const WindowSpec& spec,
                                double step_s);

}  // namespace holon
