#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <utility>
#include <vector>

#include "holon/runtime.hpp"
#include "holon/windowed.hpp"

namespace holon {

struct LatencySample {
  WindowIndex window = 0;
  PartitionId partition;
  double window_end_s = 0;
  double first_emit_s = 0;

  double latency_s() const { return first_emit_s - window_end_s; }
};

struct Percentiles {
  double avg = 0;
  double p99 = 0;
};

// Mean and nearest-rank 99th percentile (the ceil(0.99 n)-th smallest value).
// Throws UsageError for an empty input.
Percentiles compute_percentiles(std::vector<double> samples);

// Piecewise-constant curve given by (time_s, value) points in time order.
using TimeSeries = std::vector<std::pair<double, double>>;

// Samples `curve` at 0, step, 2 step, ... up to `horizon` by step
// interpolation (the last point at or before t; 0 before the first point).
TimeSeries resample(const TimeSeries& curve, double step, double horizon);

struct Sensitivity {
  // Trapezoidal area of max(failure - baseline, 0).
  double area = 0;
  // Largest positive deviation.
  double peak = 0;
  // Total grid time with a positive deviation.
  double duration_s = 0;
};

// Both curves must share one time grid; throws UsageError otherwise.
Sensitivity compute_sensitivity(const TimeSeries& failure, const TimeSeries& baseline);

// One point per window at its event-time end in seconds, valued at the
// slowest partition's latency for that window. Event time keeps the x axis
// of a run and its baseline aligned in both drivers.
TimeSeries latency_curve(const std::vector<LatencySample>& samples, const WindowSpec& spec);

struct ThroughputBucket {
  std::uint64_t second = 0;
  std::uint64_t events = 0;
};

struct MetricsReport {
  std::vector<LatencySample> latency;
  // Dense from second 0; one bucket per second.
  std::vector<ThroughputBucket> throughput;
  std::uint64_t events_consumed = 0;
  std::optional<Percentiles> percentiles;
  std::optional<Sensitivity> sensitivity;
};

// Maps driver clock readings onto seconds.
struct TimeBase {
  // Processing time of a step observed at `now`; buckets throughput.
  std::function<double(Clock)> clock_s;
  // Time at which a step observed at `now` has completed.
  std::function<double(Clock)> emit_s;
  // Time at which event time passed the end of window w. When empty, the
  // sink uses its own ingestion record mapped through clock_s.
  std::function<double(WindowIndex)> window_end_s;
};

// Thread-safe NodeObserver collecting throughput and first-emission latency.
// Only first-time progress counts: replays after recovery add nothing.
// Latency is window-completion latency, so it is sampled for windowed
// handlers only.
class MetricsSink : public NodeObserver {
 public:
  MetricsSink(std::vector<PartitionId> partitions, WindowSpec spec, bool measure_latency, TimeBase time);

  void on_step(const StepReport& report, Clock now) override;

  // Threaded driver: records that event time `ts` was ingested at `now`.
  void on_ingest(Timestamp ts, Clock now);
  // First ingestion clock reading at or past event time `ts`.
  std::optional<Clock> ingested_at(Timestamp ts) const;

  // Every partition consumed `end[p]` events and, if windowed, emitted
  // windows [0, windows).
  bool complete(const std::map<PartitionId, std::uint64_t>& end, std::optional<WindowIndex> windows) const;
  std::uint64_t progress(const PartitionId& p) const;
  std::optional<WindowIndex> frontier(const PartitionId& p) const;

  MetricsReport report() const;

 private:
  std::optional<Clock> ingested_at_locked(Timestamp ts) const;

  WindowSpec spec_;
  bool measure_latency_;
  TimeBase time_;
  mutable std::mutex mu_;
  std::map<PartitionId, std::uint64_t> max_idx_;
  std::map<PartitionId, WindowIndex> max_frontier_;
  std::map<std::uint64_t, std::uint64_t> buckets_;
  std::map<std::pair<PartitionId, WindowIndex>, LatencySample> first_emit_;
  std::vector<std::pair<Timestamp, Clock>> ingest_;
};

}  // namespace holon
