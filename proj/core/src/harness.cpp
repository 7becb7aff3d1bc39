#include "holon/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <thread>
#include <tuple>

#include "holon/errors.hpp"

namespace holon {

namespace {

struct Infrastructure {
  std::vector<PartitionId> partitions;
  std::unique_ptr<Handler> handler;
  std::unique_ptr<LoggedTopic> input;
  std::unique_ptr<LoggedTopic> output;
  std::unique_ptr<BroadcastTopic> broadcast;
  std::unique_ptr<BroadcastTopic> control;
  std::unique_ptr<CheckpointStore> store;
  std::unique_ptr<Cluster> cluster;
  bool windowed = false;

  Infrastructure(const ScenarioConfig& cfg, Clock network_delay)
      : partitions(cfg.partitions()), handler(make_handler(cfg.workload, cfg.window_spec())) {
    const auto members = membership_of(partitions);
    input = std::make_unique<LoggedTopic>("input", partitions);
    output = std::make_unique<LoggedTopic>("output", partitions);
    broadcast = std::make_unique<BroadcastTopic>("broadcast");
    control = std::make_unique<BroadcastTopic>("control");
    store = std::make_unique<CheckpointStore>([h = handler.get(), members](const PartitionId& p) {
      return PartitionState{0, 0, h->initial_state(p, members)};
    });
    cluster = std::make_unique<Cluster>(
        Cluster{*input, *output, *broadcast, *control, *store, *handler, partitions, network_delay});
    windowed = handler->next_window(handler->initial_state(partitions.front(), members)).has_value();
  }
};

void check_log(const ScenarioConfig& cfg, const nexmark::EventLog& log) {
  const auto parts = cfg.partitions();
  if (log.size() != parts.size()) throw UsageError("event log does not match the scenario's partitions");
  for (const auto& p : parts)
    if (!log.contains(p)) throw UsageError("event log lacks partition " + p.str());
}

std::uint64_t count_events(const nexmark::EventLog& log) {
  std::uint64_t n = 0;
  for (const auto& [_, events] : log) n += events.size();
  return n;
}

}  // namespace

OutputLines collect_outputs(const LoggedTopic& output) {
  OutputLines out;
  OutputDeduplicator dedup;
  for (const auto& p : output.partitions()) {
    auto& lines = out[p];
    const auto end = output.end_offset(p);
    for (std::uint64_t at = 0; at < end;) {
      auto batch = output.read(p, at, 4096);
      for (const auto& r : batch.records)
        if (dedup.accept(r)) lines.push_back(render_output(r));
      at = batch.next;
    }
  }
  return out;
}

// --- simulation ---

struct SimulatedDeployment::Slot {
  NodeConfig config;
  std::unique_ptr<Node> node;
};

SimulatedDeployment::SimulatedDeployment(const ScenarioConfig& cfg)
    : SimulatedDeployment(cfg, nexmark::generate(cfg.generator)) {}

SimulatedDeployment::SimulatedDeployment(const ScenarioConfig& cfg, nexmark::EventLog log)
    : cfg_(cfg), spec_(cfg.window_spec()), log_(std::move(log)) {
  cfg_.validate();
  check_log(cfg_, log_);
  auto infra = Infrastructure(cfg_, cfg_.sim.network_delay);
  handler_ = std::move(infra.handler);
  input_ = std::move(infra.input);
  output_ = std::move(infra.output);
  broadcast_ = std::move(infra.broadcast);
  control_ = std::move(infra.control);
  store_ = std::move(infra.store);
  cluster_ = std::move(infra.cluster);
  windowed_ = infra.windowed;

  windows_ = nexmark::window_count(log_, spec_);
  events_ = count_events(log_);
  for (const auto& [p, events] : log_) {
    ingested_[p] = 0;
    end_[p] = events.size();
  }

  const double tick_ms = static_cast<double>(cfg_.sim.tick_ms);
  TimeBase time;
  time.clock_s = [tick_ms](Clock c) { return static_cast<double>(c) * tick_ms / 1000.0; };
  time.emit_s = [tick_ms](Clock c) { return static_cast<double>(c + 1) * tick_ms / 1000.0; };
  time.window_end_s = [spec = spec_](WindowIndex w) { return static_cast<double>(spec.window_end(w)) / 1000.0; };
  sink_ = std::make_unique<MetricsSink>(cfg_.partitions(), spec_, cfg_.measure_window_latency, std::move(time));

  for (const auto& n : cfg_.nodes) {
    auto slot = std::make_unique<Slot>();
    slot->config = n;
    slot->node = std::make_unique<Node>(n, *cluster_, 0, sink_.get());
    slots_.push_back(std::move(slot));
  }
}

SimulatedDeployment::~SimulatedDeployment() = default;

void SimulatedDeployment::apply_failures() {
  for (const auto& f : cfg_.failures) {
    auto it = std::find_if(slots_.begin(), slots_.end(), [&](const auto& s) { return s->config.id == f.node; });
    auto& slot = **it;
    if (static_cast<Clock>(f.stop_at) == now_) slot.node.reset();
    if (f.restart_at && static_cast<Clock>(*f.restart_at) == now_) {
      // A restarted node keeps its id but comes back empty and steals.
      auto config = slot.config;
      config.initial_partitions.clear();
      slot.node = std::make_unique<Node>(config, *cluster_, now_, sink_.get());
    }
  }
}

void SimulatedDeployment::ingest() {
  const Timestamp limit = (now_ + 1) * cfg_.sim.tick_ms;
  for (auto& [p, next] : ingested_) {
    const auto& events = log_.at(p);
    std::vector<Record> batch;
    while (next < events.size() && events[next].ts < limit) batch.push_back(to_input_record(events[next++]));
    if (!batch.empty()) input_->append(p, batch);
  }
}

void SimulatedDeployment::step() {
  apply_failures();
  ingest();
  for (auto& slot : slots_) {
    if (!slot->node) continue;
    for (std::uint32_t k = 0; k < cfg_.sim.steps_per_tick; ++k) slot->node->tick(now_);
  }
  ++now_;
}

bool SimulatedDeployment::finished() const {
  for (const auto& [p, next] : ingested_)
    if (next < log_.at(p).size()) return false;
  return sink_->complete(end_, windowed_ ? std::optional<WindowIndex>(windows_) : std::nullopt);
}

bool SimulatedDeployment::run() {
  while (!finished() && now_ < cfg_.sim.max_ticks) step();
  return finished();
}

const Node* SimulatedDeployment::node(const std::string& id) const {
  for (const auto& s : slots_)
    if (s->config.id == id) return s->node.get();
  throw UsageError("unknown node " + id);
}

std::vector<std::string> SimulatedDeployment::node_ids() const {
  std::vector<std::string> out;
  for (const auto& s : slots_) out.push_back(s->config.id);
  return out;
}

std::optional<Timestamp> SimulatedDeployment::live_global_watermark() const {
  std::optional<Timestamp> best;
  for (const auto& s : slots_) {
    if (!s->node) continue;
    for (const auto& [_, ps] : s->node->partitions())
      for (const auto& [__, w] : ps.state.wcrdts) best = std::max(best.value_or(0), w.global_watermark());
  }
  return best;
}

std::optional<Timestamp> SimulatedDeployment::live_own_watermark(const PartitionId& p) const {
  std::optional<Timestamp> best;
  for (const auto& s : slots_) {
    if (!s->node) continue;
    auto it = s->node->partitions().find(p);
    if (it == s->node->partitions().end()) continue;
    for (const auto& [_, w] : it->second.state.wcrdts) best = std::max(best.value_or(0), w.own_watermark());
  }
  return best;
}

RunResult SimulatedDeployment::result() const {
  RunResult r;
  r.metrics = sink_->report();
  r.outputs = collect_outputs(*output_);
  r.completed = finished();
  r.elapsed_s = static_cast<double>(now_ * cfg_.sim.tick_ms) / 1000.0;
  r.events_generated = events_;
  r.windows = windows_;
  for (const auto& s : slots_) {
    if (!s->node) continue;
    for (const auto& d : s->node->diagnostics()) r.diagnostics.push_back(s->config.id + ": " + d);
  }
  return r;
}

// --- threads ---

RunResult run_threaded(const ScenarioConfig& cfg, const nexmark::EventLog& log) {
  using namespace std::chrono_literals;
  cfg.validate();
  check_log(cfg, log);
  const auto spec = cfg.window_spec();
  Infrastructure infra(cfg, cfg.threaded.network_delay_ms);
  auto& cluster = *infra.cluster;

  const auto start = std::chrono::steady_clock::now();
  auto now_ms = [start] {
    return static_cast<Clock>(
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count());
  };

  TimeBase time;
  time.clock_s = [](Clock c) { return static_cast<double>(c) / 1000.0; };
  time.emit_s = time.clock_s;
  MetricsSink sink(infra.partitions, spec, cfg.measure_window_latency, std::move(time));

  std::map<PartitionId, std::uint64_t> end;
  for (const auto& [p, events] : log) end[p] = events.size();
  const auto windows = nexmark::window_count(log, spec);

  std::atomic<bool> abort{false};
  std::mutex error_mu;
  std::exception_ptr error;
  auto fail = [&](std::exception_ptr e) {
    std::lock_guard lock(error_mu);
    if (!error) error = e;
    abort = true;
  };

  struct Worker {
    NodeConfig config;
    std::unique_ptr<Node> node;
    std::thread thread;
    std::atomic<bool> stop{false};
  };
  std::vector<std::unique_ptr<Worker>> workers;
  std::vector<std::string> diagnostics;

  auto start_worker = [&](Worker& w, const NodeConfig& config) {
    w.node = std::make_unique<Node>(config, cluster, now_ms(), &sink);
    w.stop = false;
    w.thread = std::thread([&, node = w.node.get(), stop = &w.stop] {
      try {
        while (!*stop && !abort) {
          auto r = node->tick(now_ms());
          if (r.from_idx == r.next_idx) std::this_thread::sleep_for(1ms);
        }
      } catch (...) {
        fail(std::current_exception());
      }
    });
  };
  auto stop_worker = [&](Worker& w) {
    w.stop = true;
    if (w.thread.joinable()) w.thread.join();
    if (w.node) {
      for (const auto& d : w.node->diagnostics()) diagnostics.push_back(w.config.id + ": " + d);
    }
    w.node.reset();
  };

  std::atomic<bool> ingested{false};
  std::thread ingester([&] {
    try {
      std::vector<std::tuple<Timestamp, std::size_t, const nexmark::Event*>> order;
      std::vector<PartitionId> ids;
      for (const auto& [p, events] : log) {
        for (const auto& e : events) order.emplace_back(e.ts, ids.size(), &e);
        ids.push_back(p);
      }
      std::stable_sort(order.begin(), order.end(),
                       [](const auto& a, const auto& b) { return std::get<0>(a) < std::get<0>(b); });
      std::vector<std::vector<Record>> batches(ids.size());
      for (std::size_t i = 0; i < order.size() && !abort;) {
        const auto chunk_end = std::min(order.size(), i + cfg.threaded.ingest_chunk);
        if (cfg.threaded.ingest_rate > 0) {
          const auto due = start + std::chrono::duration<double>(static_cast<double>(i) /
                                                                 static_cast<double>(cfg.threaded.ingest_rate));
          std::this_thread::sleep_until(due);
        }
        sink.on_ingest(std::get<0>(order[chunk_end - 1]), now_ms());
        for (; i < chunk_end; ++i) batches[std::get<1>(order[i])].push_back(to_input_record(*std::get<2>(order[i])));
        for (std::size_t p = 0; p < ids.size(); ++p) {
          if (batches[p].empty()) continue;
          infra.input->append(ids[p], batches[p]);
          batches[p].clear();
        }
      }
      ingested = true;
    } catch (...) {
      fail(std::current_exception());
    }
  });

  for (const auto& n : cfg.nodes) {
    auto w = std::make_unique<Worker>();
    w->config = n;
    start_worker(*w, n);
    workers.push_back(std::move(w));
  }

  struct Action {
    double at;
    std::size_t worker;
    bool restart;
  };
  std::vector<Action> actions;
  for (const auto& f : cfg.failures) {
    auto it = std::find_if(workers.begin(), workers.end(), [&](const auto& w) { return w->config.id == f.node; });
    const auto idx = static_cast<std::size_t>(it - workers.begin());
    actions.push_back({f.stop_at, idx, false});
    if (f.restart_at) actions.push_back({*f.restart_at, idx, true});
  }
  std::stable_sort(actions.begin(), actions.end(), [](const Action& a, const Action& b) { return a.at < b.at; });

  bool completed = false;
  std::size_t next_action = 0;
  const std::optional<WindowIndex> expect = infra.windowed ? std::optional<WindowIndex>(windows) : std::nullopt;
  while (!abort) {
    const double t = static_cast<double>(now_ms()) / 1000.0;
    for (; next_action < actions.size() && actions[next_action].at <= t; ++next_action) {
      auto& w = *workers[actions[next_action].worker];
      stop_worker(w);
      if (actions[next_action].restart) {
        auto config = w.config;
        config.initial_partitions.clear();
        start_worker(w, config);
      }
    }
    if (ingested && sink.complete(end, expect)) {
      completed = true;
      break;
    }
    if (t > cfg.threaded.max_seconds) break;
    std::this_thread::sleep_for(2ms);
  }
  const double elapsed = static_cast<double>(now_ms()) / 1000.0;
  abort = true;
  for (auto& w : workers) stop_worker(*w);
  ingester.join();
  if (error) std::rethrow_exception(error);

  RunResult r;
  r.metrics = sink.report();
  r.outputs = collect_outputs(*infra.output);
  r.completed = completed;
  r.elapsed_s = elapsed;
  r.events_generated = count_events(log);
  r.windows = windows;
  r.diagnostics = std::move(diagnostics);
  return r;
}

// --- entry points ---

RunResult run_once(const ScenarioConfig& cfg) {
  if (cfg.driver == DriverKind::threaded) return run_threaded(cfg, nexmark::generate(cfg.generator));
  SimulatedDeployment d(cfg);
  d.run();
  return d.result();
}

Sensitivity latency_sensitivity(const RunResult& run, const RunResult& baseline, const WindowSpec& spec,
                                double step_s) {
  auto grid = [&](const RunResult& r) {
    auto curve = latency_curve(r.metrics.latency, spec);
    return resample(curve, step_s, curve.empty() ? 0.0 : curve.back().first);
  };
  return compute_sensitivity(grid(run), grid(baseline));
}

RunResult run_scenario(const ScenarioConfig& cfg) {
  auto result = run_once(cfg);
  if (!cfg.compute_sensitivity || result.metrics.latency.empty()) return result;
  const double step = cfg.driver == DriverKind::sim ? static_cast<double>(cfg.sim.tick_ms) / 1000.0 : 0.01;
  if (cfg.failures.empty()) {
    result.metrics.sensitivity = latency_sensitivity(result, result, cfg.window_spec(), step);
    return result;
  }
  auto baseline_cfg = cfg;
  baseline_cfg.failures.clear();
  const auto baseline = run_once(baseline_cfg);
  result.metrics.sensitivity = latency_sensitivity(result, baseline, cfg.window_spec(), step);
  return result;
}

}  // namespace holon
