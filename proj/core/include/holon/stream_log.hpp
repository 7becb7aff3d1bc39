#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "holon/codec.hpp"
#include "holon/lattice.hpp"
#include "holon/partition_state.hpp"
#include "holon/windowed.hpp"

namespace holon {

// Identifies a window-scoped output so consumers can deduplicate it. `key`
// separates several records of the same window (e.g. one per category).
struct RecordTag {
  PartitionId partition;
  WindowIndex window = 0;
  std::string key;

  friend auto operator<=>(const RecordTag&, const RecordTag&) = default;
};

struct Record {
  std::string payload;
  std::optional<RecordTag> tag;

  void encode(ByteWriter& out) const;
  std::string encode() const;
  static Record decode(ByteReader& in);

  friend bool operator==(const Record&, const Record&) = default;
};

struct ReadResult {
  std::vector<Record> records;
  std::uint64_t next = 0;
};

// Partitioned append-only log with dense 0-based offsets. Safe for
// concurrent use; each partition has its own reader/writer lock.
//
// With a directory, every record is also appended to
// <dir>/<topic>/<partition>.log as a u32 length frame followed by the
// encoded record, and existing files are loaded on construction.
class LoggedTopic {
 public:
  LoggedTopic(std::string name, const std::vector<PartitionId>& partitions,
              std::optional<std::filesystem::path> dir = std::nullopt);

  // Returns the offset of the first appended record. Throws UsageError for
  // an unknown partition.
  std::uint64_t append(const PartitionId& p, std::span<const Record> records);

  // Up to `max_batch` records from `from`; reading at or past the end gives
  // an empty batch with next == from.
  ReadResult read(const PartitionId& p, std::uint64_t from, std::size_t max_batch) const;

  // Idempotent positional write. Offsets already present must hold equal
  // records (DeterminismViolation otherwise); the rest is appended. Returns
  // how many records were new. Throws UsageError if odx is past the end.
  std::size_t write_at(const PartitionId& p, std::uint64_t odx, std::span<const Record> records);

  std::uint64_t end_offset(const PartitionId& p) const;
  std::vector<PartitionId> partitions() const;
  const std::string& name() const { return name_; }

 private:
  struct Partition {
    mutable std::shared_mutex mu;
    std::deque<Record> records;
    std::ofstream file;
  };

  Partition& partition(const PartitionId& p) const;
  void persist(Partition& part, std::span<const Record> records);

  std::string name_;
  std::map<PartitionId, std::unique_ptr<Partition>> parts_;
};

enum class FrameKind : std::uint8_t { state_snapshot = 0, heartbeat = 1 };

// Single-partition, totally ordered topic with per-consumer cursors. Frames
// carry the publish time so a consumer can model delivery lag.
class BroadcastTopic {
 public:
  struct Cursor {
    std::uint64_t next = 0;
  };

  explicit BroadcastTopic(std::string name) : name_(std::move(name)) {}

  void publish(std::string frame, std::uint64_t at);
  // Frames past the cursor in log order, stopping at the first one published
  // after `visible_until`. Advances the cursor.
  std::vector<std::string> poll(Cursor& cursor,
                                std::uint64_t visible_until = std::numeric_limits<std::uint64_t>::max()) const;
  std::uint64_t size() const;
  const std::string& name() const { return name_; }

 private:
  std::string name_;
  mutable std::shared_mutex mu_;
  std::deque<std::pair<std::uint64_t, std::string>> frames_;
};

// Durable partition states. put keeps whichever state has the larger idx
// (ties keep the stored one); get falls back to the initial state.
//
// Each entry may carry the first window the stored state has not emitted.
// Windows below the minimum over all partitions are never needed again,
// not even by a partition recovered from its checkpoint. Frontiers live in
// memory only; entries loaded from disk report 0.
class CheckpointStore {
 public:
  using InitialState = std::function<PartitionState(const PartitionId&)>;

  explicit CheckpointStore(InitialState initial, std::optional<std::filesystem::path> dir = std::nullopt);

  void put(const PartitionId& p, const PartitionState& state, std::optional<std::uint64_t> frontier = std::nullopt);
  PartitionState get(const PartitionId& p) const;
  std::optional<std::uint64_t> stored_idx(const PartitionId& p) const;
  // Minimum stored frontier; partitions without one count as 0.
  std::uint64_t min_frontier(const std::vector<PartitionId>& partitions) const;

 private:
  struct Entry {
    std::uint64_t idx;
    std::string bytes;
    std::optional<std::uint64_t> frontier;
  };

  InitialState initial_;
  std::optional<std::filesystem::path> dir_;
  mutable std::mutex mu_;
  std::map<PartitionId, Entry> entries_;
};

}  // namespace holon
