#include "holon/runtime.hpp"

#include <algorithm>
#include <iterator>

#include "holon/codec.hpp"
#include "holon/errors.hpp"

namespace holon {

std::string encode_state_frame(const PartitionId& partition, const std::string& name,
                               const WindowedCrdt& wcrdt) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(FrameKind::state_snapshot));
  w.str(partition.str());
  w.str(name);
  wcrdt.encode_snapshot(w);
  return std::move(w).bytes();
}

std::string encode_heartbeat_frame(const Heartbeat& hb) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(FrameKind::heartbeat));
  w.str(hb.node);
  w.str(hb.partition.str());
  w.u64(hb.next_idx);
  w.u64(hb.emitted_at);
  return std::move(w).bytes();
}

std::variant<StateFrame, Heartbeat> decode_frame(std::string_view frame) {
  ByteReader in(frame);
  const auto kind = in.u8();
  if (kind == static_cast<std::uint8_t>(FrameKind::state_snapshot)) {
    auto partition = in.str();
    auto name = in.str();
    if (partition.empty()) throw DecodeError("empty partition in state frame");
    StateFrame out{PartitionId(std::move(partition)), std::move(name), WindowedCrdt::decode_snapshot(in)};
    in.expect_done();
    return out;
  }
  if (kind == static_cast<std::uint8_t>(FrameKind::heartbeat)) {
    Heartbeat hb{in.str(), PartitionId("_"), 0, 0};
    auto partition = in.str();
    if (partition.empty()) throw DecodeError("empty partition in heartbeat");
    hb.partition = PartitionId(std::move(partition));
    hb.next_idx = in.u64();
    hb.emitted_at = in.u64();
    in.expect_done();
    return hb;
  }
  throw DecodeError("unknown frame kind " + std::to_string(kind));
}

void NodeConfig::validate() const {
  if (id.empty()) throw UsageError("node id must be non-empty");
  if (batch_size == 0 || checkpoint_every == 0 || sync_every == 0 || heartbeat_every == 0 ||
      steal_every == 0 || steal_stale_after == 0) {
    throw UsageError("node " + id + ": batch size, cadences and stale threshold must be positive");
  }
}

Membership membership_of(const std::vector<PartitionId>& partitions) {
  return Membership(partitions.begin(), partitions.end());
}

Node::Node(NodeConfig config, Cluster& cluster, Clock started_at, NodeObserver* observer)
    : config_(std::move(config)),
      cluster_(cluster),
      members_(membership_of(cluster.partitions)),
      observer_(observer),
      started_at_(started_at),
      rng_(config_.seed) {
  config_.validate();
  // A (re)started node subscribes at the current end of both topics.
  broadcast_cursor_.next = cluster_.broadcast.size();
  control_cursor_.next = cluster_.control.size();
  for (const auto& p : config_.initial_partitions) recover(p);
}

void Node::recover(const PartitionId& p) {
  if (partitions_.contains(p)) return;
  if (!members_.contains(p)) throw UsageError("unknown partition " + p.str());
  partitions_.emplace(p, cluster_.store.get(p));
}

StepReport Node::run_step(Clock now) {
  StepReport report;
  report.node = config_.id;
  if (partitions_.empty()) return report;

  auto it = partitions_.begin();
  std::advance(it, static_cast<std::ptrdiff_t>(rng_() % partitions_.size()));
  const auto& id = it->first;
  auto& ps = it->second;

  auto batch = cluster_.input.read(id, ps.idx, config_.batch_size);
  report.partition = id;
  report.from_idx = ps.idx;
  report.from_odx = ps.odx;
  report.outputs = cluster_.handler.run_batch(id, ps.state, batch.records);
  report.first_emitted = cluster_.output.write_at(id, ps.odx, report.outputs);
  ps.idx = batch.next;
  ps.odx += report.outputs.size();
  report.next_idx = ps.idx;
  report.next_window = cluster_.handler.next_window(ps.state);

  if (observer_) observer_->on_step(report, now);
  return report;
}

void Node::checkpoint(const PartitionId& p) {
  auto it = partitions_.find(p);
  if (it == partitions_.end()) throw UsageError("node " + config_.id + " does not hold " + p.str());
  cluster_.store.put(p, it->second, cluster_.handler.next_window(it->second.state));
}

void Node::checkpoint_all() {
  for (const auto& [p, ps] : partitions_) cluster_.store.put(p, ps, cluster_.handler.next_window(ps.state));
}

void Node::collect_garbage() {
  const auto floor = cluster_.store.min_frontier(cluster_.partitions);
  if (floor == 0) return;
  for (auto& [_, ps] : partitions_) {
    for (auto& [__, wcrdt] : ps.state.wcrdts)
      wcrdt.gc_completed_windows(std::min(floor, wcrdt.spec().closed_by(wcrdt.global_watermark())));
  }
}

Clock Node::visible_until(Clock now) const { return now - cluster_.network_delay; }

void Node::sync_pump(Clock now) {
  for (const auto& [p, ps] : partitions_) {
    for (const auto& [name, wcrdt] : ps.state.wcrdts)
      cluster_.broadcast.publish(encode_state_frame(p, name, wcrdt), now);
  }
  if (now < cluster_.network_delay) return;

  for (const auto& bytes : cluster_.broadcast.poll(broadcast_cursor_, visible_until(now))) {
    auto decoded = decode_frame(bytes);
    auto* frame = std::get_if<StateFrame>(&decoded);
    if (!frame || partitions_.empty()) continue;
    bool matched = false;
    for (auto& [p, ps] : partitions_) {
      auto target = ps.state.wcrdts.find(frame->name);
      if (target == ps.state.wcrdts.end()) continue;
      target->second.merge(frame->snapshot);
      matched = true;
    }
    if (!matched) {
      diagnostics_.push_back("ignored snapshot for unknown wcrdt '" + frame->name + "' from " +
                             frame->partition.str());
    }
  }
  reload_overtaken();
}

void Node::reload_overtaken() {
  for (auto& [p, ps] : partitions_) {
    const auto next = cluster_.handler.next_window(ps.state);
    if (!next) continue;
    bool overtaken = false;
    for (const auto& [_, wcrdt] : ps.state.wcrdts) overtaken = overtaken || wcrdt.floor() > *next;
    if (!overtaken) continue;
    // Windows this replica still has to emit were collected elsewhere. The
    // stored checkpoint is at or past the floor, so continue from there.
    ps = cluster_.store.get(p);
  }
}

void Node::emit_heartbeat(Clock now) {
  for (const auto& [p, ps] : partitions_)
    cluster_.control.publish(encode_heartbeat_frame(Heartbeat{config_.id, p, ps.idx, now}), now);
}

std::set<PartitionId> Node::detect_stale(Clock now) {
  if (now >= cluster_.network_delay) {
    for (const auto& bytes : cluster_.control.poll(control_cursor_, visible_until(now))) {
      auto decoded = decode_frame(bytes);
      if (auto* hb = std::get_if<Heartbeat>(&decoded)) {
        auto [it, inserted] = last_heartbeat_.try_emplace(hb->partition, hb->emitted_at);
        if (!inserted && it->second < hb->emitted_at) it->second = hb->emitted_at;
      }
    }
  }

  std::set<PartitionId> stale;
  for (const auto& p : cluster_.partitions) {
    if (partitions_.contains(p)) continue;
    auto it = last_heartbeat_.find(p);
    const Clock last = it == last_heartbeat_.end() ? started_at_ : it->second;
    if (now > last && now - last > config_.steal_stale_after) stale.insert(p);
  }
  return stale;
}

std::vector<PartitionId> Node::work_steal(Clock now) {
  std::vector<PartitionId> stolen;
  for (const auto& p : detect_stale(now)) {
    recover(p);
    stolen.push_back(p);
  }
  return stolen;
}

Value Node::await_window(const std::string& name, WindowIndex w, Clock now, Clock deadline,
                         const std::function<Clock()>& wait) {
  for (;;) {
    bool declared = false;
    for (const auto& [p, ps] : partitions_) {
      auto it = ps.state.wcrdts.find(name);
      if (it == ps.state.wcrdts.end()) continue;
      declared = true;
      if (auto v = it->second.window_value(w)) return *v;
    }
    if (!declared) throw UsageError("node " + config_.id + " holds no wcrdt named " + name);
    if (now > deadline) {
      throw TimeoutError("window " + std::to_string(w) + " of " + name + " still incomplete at " +
                         std::to_string(now));
    }
    sync_pump(now);
    now = wait();
  }
}

StepReport Node::tick(Clock now) {
  auto due = [this](std::uint64_t every) { return steps_ % every == 0; };
  auto report = run_step(now);
  if (due(config_.checkpoint_every)) {
    checkpoint_all();
    collect_garbage();
  }
  if (due(config_.sync_every)) sync_pump(now);
  if (due(config_.heartbeat_every)) emit_heartbeat(now);
  if (due(config_.steal_every)) work_steal(now);
  ++steps_;
  return report;
}

}  // namespace holon
