#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "holon/partition_state.hpp"
#include "holon/stream_log.hpp"
#include "holon/windowed.hpp"

namespace holon {

// Harness time: simulation ticks, or milliseconds in the threaded driver.
using Clock = std::uint64_t;

// A partition's processing function. Implementations must be pure: no I/O,
// no clocks, no randomness. run_batch may be called with an empty batch so
// the handler can emit windows completed by merges alone.
class Handler {
 public:
  virtual ~Handler() = default;

  virtual std::string_view name() const = 0;
  virtual HandlerState initial_state(const PartitionId& self, const Membership& members) const = 0;
  virtual std::vector<Record> run_batch(const PartitionId& self, HandlerState& state,
                                        std::span<const Record> input) const = 0;
  // For windowed handlers: the first window not yet emitted.
  virtual std::optional<WindowIndex> next_window(const HandlerState&) const { return std::nullopt; }
};

struct Heartbeat {
  std::string node;
  PartitionId partition;
  std::uint64_t next_idx = 0;
  Clock emitted_at = 0;

  friend bool operator==(const Heartbeat&, const Heartbeat&) = default;
};

struct StateFrame {
  PartitionId partition;
  std::string name;
  WindowedCrdt snapshot;
};

std::string encode_state_frame(const PartitionId& partition, const std::string& name,
                               const WindowedCrdt& wcrdt);
std::string encode_heartbeat_frame(const Heartbeat& hb);
std::variant<StateFrame, Heartbeat> decode_frame(std::string_view frame);

struct NodeConfig {
  std::string id;
  std::vector<PartitionId> initial_partitions;
  std::size_t batch_size = 64;
  // Cadences are in node steps.
  std::uint64_t checkpoint_every = 5;
  std::uint64_t sync_every = 2;
  std::uint64_t heartbeat_every = 2;
  std::uint64_t steal_every = 10;
  // In driver clock units.
  Clock steal_stale_after = 50;
  std::uint64_t seed = 0;

  void validate() const;
};

// Shared infrastructure every node of a deployment talks to.
struct Cluster {
  LoggedTopic& input;
  LoggedTopic& output;
  BroadcastTopic& broadcast;
  BroadcastTopic& control;
  CheckpointStore& store;
  const Handler& handler;
  std::vector<PartitionId> partitions;
  // Frames become visible to other nodes this many clock units after
  // publication.
  Clock network_delay = 0;
};

Membership membership_of(const std::vector<PartitionId>& partitions);

struct StepReport {
  std::string node;
  std::optional<PartitionId> partition;
  std::uint64_t from_idx = 0;
  std::uint64_t next_idx = 0;
  std::uint64_t from_odx = 0;
  std::vector<Record> outputs;
  // The trailing `first_emitted` outputs were new to the output log.
  std::size_t first_emitted = 0;
  std::optional<WindowIndex> next_window;
};

class NodeObserver {
 public:
  virtual ~NodeObserver() = default;
  virtual void on_step(const StepReport& report, Clock now) = 0;
};

// One executor node: a dynamic set of partitions driven through read, run,
// write, checkpoint, sync, heartbeat and steal. Not thread-safe; a driver
// runs each node on one worker.
class Node {
 public:
  Node(NodeConfig config, Cluster& cluster, Clock started_at, NodeObserver* observer = nullptr);

  const std::string& id() const { return config_.id; }
  const NodeConfig& config() const { return config_; }

  // Loads the partition from the checkpoint store unless already held.
  void recover(const PartitionId& p);
  // Processes one batch of one randomly chosen held partition.
  StepReport run_step(Clock now);
  void checkpoint(const PartitionId& p);
  void checkpoint_all();
  // Drops WCRDT windows below both the global watermark and every
  // partition's checkpointed emission frontier. Runs after each checkpoint.
  void collect_garbage();
  // Publishes snapshots of every held WCRDT and merges everything received.
  void sync_pump(Clock now);
  void emit_heartbeat(Clock now);
  // Partitions this node does not hold whose heartbeats are older than
  // steal_stale_after. Partitions never seen count from the node's start.
  std::set<PartitionId> detect_stale(Clock now);
  std::vector<PartitionId> work_steal(Clock now);

  // Safe-mode read: returns once window `w` of WCRDT `name` is complete in a
  // held partition. `wait` lets the driver advance the world and returns the
  // new time. Throws TimeoutError past `deadline`.
  Value await_window(const std::string& name, WindowIndex w, Clock now, Clock deadline,
                     const std::function<Clock()>& wait);

  // One scheduler step: run_step, then every cadence that is due.
  StepReport tick(Clock now);

  bool holds(const PartitionId& p) const { return partitions_.contains(p); }
  const std::map<PartitionId, PartitionState>& partitions() const { return partitions_; }
  std::uint64_t steps() const { return steps_; }
  const std::vector<std::string>& diagnostics() const { return diagnostics_; }

 private:
  Clock visible_until(Clock now) const;
  // Replaces held partitions whose unemitted windows fall below a merged
  // collection floor by their stored checkpoint.
  void reload_overtaken();

  NodeConfig config_;
  Cluster& cluster_;
  Membership members_;
  NodeObserver* observer_;
  Clock started_at_;
  std::mt19937_64 rng_;
  std::map<PartitionId, PartitionState> partitions_;
  BroadcastTopic::Cursor broadcast_cursor_;
  BroadcastTopic::Cursor control_cursor_;
  std::map<PartitionId, Clock> last_heartbeat_;
  std::uint64_t steps_ = 0;
  std::vector<std::string> diagnostics_;
};

}  // namespace holon
