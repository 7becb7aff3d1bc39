#include "holon/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "holon/errors.hpp"

namespace holon {

namespace {

constexpr double kGridEps = 1e-9;

}  // namespace

Percentiles compute_percentiles(std::vector<double> samples) {
  if (samples.empty()) throw UsageError("percentiles of an empty sample");
  std::sort(samples.begin(), samples.end());
  const auto n = samples.size();
  const double sum = std::accumulate(samples.begin(), samples.end(), 0.0);
  const std::size_t rank = (99 * n + 99) / 100;  // ceil(0.99 n), 1-based
  return Percentiles{sum / static_cast<double>(n), samples[rank - 1]};
}

TimeSeries resample(const TimeSeries& curve, double step, double horizon) {
  if (!(step > 0)) throw UsageError("resample step must be positive");
  if (horizon < 0) throw UsageError("resample horizon must be non-negative");
  const auto count = static_cast<std::size_t>(std::floor(horizon / step + kGridEps)) + 1;
  TimeSeries out;
  out.reserve(count);
  std::size_t next = 0;
  double current = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const double t = static_cast<double>(k) * step;
    while (next < curve.size() && curve[next].first <= t + kGridEps) current = curve[next++].second;
    out.emplace_back(t, current);
  }
  return out;
}

Sensitivity compute_sensitivity(const TimeSeries& failure, const TimeSeries& baseline) {
  if (failure.size() != baseline.size())
    throw UsageError("sensitivity curves have mismatched horizons");
  for (std::size_t i = 0; i < failure.size(); ++i) {
    if (std::abs(failure[i].first - baseline[i].first) > kGridEps)
      throw UsageError("sensitivity curves are not on a common time grid");
  }
  Sensitivity s;
  auto dev = [&](std::size_t i) { return std::max(failure[i].second - baseline[i].second, 0.0); };
  for (std::size_t i = 0; i < failure.size(); ++i) {
    s.peak = std::max(s.peak, dev(i));
    if (i + 1 == failure.size()) break;
    const double dt = failure[i + 1].first - failure[i].first;
    s.area += dt * (dev(i) + dev(i + 1)) / 2;
    if (dev(i) > 0) s.duration_s += dt;
  }
  return s;
}

TimeSeries latency_curve(const std::vector<LatencySample>& samples, const WindowSpec& spec) {
  std::map<WindowIndex, std::pair<double, double>> worst;
  for (const auto& s : samples) {
    const double end_s = static_cast<double>(spec.window_end(s.window)) / 1000.0;
    auto [it, inserted] = worst.try_emplace(s.window, end_s, s.latency_s());
    if (!inserted) it->second.second = std::max(it->second.second, s.latency_s());
  }
  TimeSeries out;
  out.reserve(worst.size());
  for (const auto& [_, point] : worst) out.push_back(point);
  return out;
}

MetricsSink::MetricsSink(std::vector<PartitionId> partitions, WindowSpec spec, bool measure_latency, TimeBase time)
    : spec_(spec), measure_latency_(measure_latency), time_(std::move(time)) {
  if (!time_.clock_s || !time_.emit_s) throw UsageError("metrics sink needs a time base");
  for (const auto& p : partitions) max_idx_[p] = 0;
}

void MetricsSink::on_step(const StepReport& report, Clock now) {
  if (!report.partition) return;
  const auto& p = *report.partition;
  std::lock_guard lock(mu_);

  auto& idx = max_idx_[p];
  if (report.next_idx > idx) {
    buckets_[static_cast<std::uint64_t>(std::floor(time_.clock_s(now)))] += report.next_idx - idx;
    idx = report.next_idx;
  }

  if (!report.next_window) return;
  auto [it, _] = max_frontier_.try_emplace(p, 0);
  for (WindowIndex w = it->second; w < *report.next_window; ++w) {
    if (!measure_latency_) continue;
    LatencySample s{w, p, 0, 0};
    s.first_emit_s = time_.emit_s(now);
    if (time_.window_end_s) {
      s.window_end_s = time_.window_end_s(w);
    } else {
      auto at = ingested_at_locked(spec_.window_end(w));
      s.window_end_s = at ? time_.clock_s(*at) : s.first_emit_s;
    }
    first_emit_.emplace(std::make_pair(p, w), s);
  }
  it->second = std::max(it->second, *report.next_window);
}

void MetricsSink::on_ingest(Timestamp ts, Clock now) {
  std::lock_guard lock(mu_);
  if (!ingest_.empty() && ingest_.back().first >= ts) return;
  ingest_.emplace_back(ts, now);
}

std::optional<Clock> MetricsSink::ingested_at(Timestamp ts) const {
  std::lock_guard lock(mu_);
  return ingested_at_locked(ts);
}

std::optional<Clock> MetricsSink::ingested_at_locked(Timestamp ts) const {
  auto it = std::lower_bound(ingest_.begin(), ingest_.end(), ts,
                             [](const auto& entry, Timestamp t) { return entry.first < t; });
  if (it == ingest_.end()) return std::nullopt;
  return it->second;
}

bool MetricsSink::complete(const std::map<PartitionId, std::uint64_t>& end,
                           std::optional<WindowIndex> windows) const {
  std::lock_guard lock(mu_);
  for (const auto& [p, n] : end) {
    auto it = max_idx_.find(p);
    if (it == max_idx_.end() || it->second < n) return false;
    if (windows && *windows > 0) {
      auto f = max_frontier_.find(p);
      if (f == max_frontier_.end() || f->second < *windows) return false;
    }
  }
  return true;
}

std::uint64_t MetricsSink::progress(const PartitionId& p) const {
  std::lock_guard lock(mu_);
  auto it = max_idx_.find(p);
  return it == max_idx_.end() ? 0 : it->second;
}

std::optional<WindowIndex> MetricsSink::frontier(const PartitionId& p) const {
  std::lock_guard lock(mu_);
  auto it = max_frontier_.find(p);
  if (it == max_frontier_.end()) return std::nullopt;
  return it->second;
}

MetricsReport MetricsSink::report() const {
  std::lock_guard lock(mu_);
  MetricsReport r;
  if (!buckets_.empty()) {
    const auto last = buckets_.rbegin()->first;
    for (std::uint64_t s = 0; s <= last; ++s) {
      auto it = buckets_.find(s);
      r.throughput.push_back(ThroughputBucket{s, it == buckets_.end() ? 0 : it->second});
    }
  }
  for (const auto& b : r.throughput) r.events_consumed += b.events;

  for (const auto& [_, s] : first_emit_) r.latency.push_back(s);
  std::stable_sort(r.latency.begin(), r.latency.end(),
                   [](const LatencySample& a, const LatencySample& b) { return a.first_emit_s < b.first_emit_s; });
  if (!r.latency.empty()) {
    std::vector<double> values;
    values.reserve(r.latency.size());
    for (const auto& s : r.latency) values.push_back(s.latency_s());
    r.percentiles = compute_percentiles(std::move(values));
  }
  return r;
}

}  // namespace holon
