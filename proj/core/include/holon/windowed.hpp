#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>

#include "holon/codec.hpp"
#include "holon/lattice.hpp"

namespace holon {

// Event-time unit. The Nexmark generator uses milliseconds.
using Timestamp = std::uint64_t;
using WindowIndex = std::uint64_t;
using Membership = std::set<ReplicaId>;

// Tumbling windows: window w covers [origin + w*length, origin + (w+1)*length).
class WindowSpec {
 public:
  explicit WindowSpec(std::uint64_t length, Timestamp origin = 0);

  std::uint64_t length() const { return length_; }
  Timestamp origin() const { return origin_; }

  // Throws UsageError for ts < origin.
  WindowIndex window_of(Timestamp ts) const;
  Timestamp window_start(WindowIndex w) const;
  Timestamp window_end(WindowIndex w) const;
  // Number of leading windows whose end is <= watermark, i.e. windows
  // [0, n) are closed once every replica has reached `watermark`.
  WindowIndex closed_by(Timestamp watermark) const;

  void encode(ByteWriter& out) const;
  static WindowSpec decode(ByteReader& in);

  friend bool operator==(const WindowSpec&, const WindowSpec&) = default;

 private:
  std::uint64_t length_;
  Timestamp origin_;
};

// Windowed CRDT replica owned by one partition (`self`).
//
// The shared lattice state is (windows, progress). A window is complete once
// the global watermark, min(progress) over all members, reaches its end; a
// complete window can no longer change anywhere, so its value is final.
//
// Besides the shared state the replica tracks its own contributions and its
// own watermark. A partition recovered from a checkpoint may already have
// received merges carrying its predecessor's later contributions; replaying
// the input then recomputes the same contributions, which are joined (never
// added) into the shared windows. The late-event guard uses the own
// watermark for the same reason.
//
// Collected windows are summarised by a floor: windows below it are gone
// from every state that has seen the floor and never read as complete
// again. The floor is part of the shared state and merges by maximum.
class WindowedCrdt {
 public:
  // Throws UsageError if `members` is empty or does not contain `self`.
  WindowedCrdt(WindowSpec spec, Lattice zero, Membership members, ReplicaId self);

  // Throws LateEventError for ts below this replica's own watermark.
  void insert(const Update& element, Timestamp ts);
  // Monotone; a stale ts is a no-op.
  void increment_watermark(Timestamp ts);

  Timestamp global_watermark() const;
  bool is_complete(WindowIndex w) const;
  // Present iff the window is complete. Complete windows without entries
  // read as the zero value.
  std::optional<Value> window_value(WindowIndex w) const;

  // Joins the shared state of `other`. Throws UsageError when the window
  // spec, zero kind, or membership differ.
  void merge(const WindowedCrdt& other);

  // Drops windows [.., keep_from) and raises the floor. Throws UsageError if
  // any of them is not complete. Only safe once no replica, including one
  // recovered from a checkpoint, still has to read them; a replica that
  // merges a floor above its own needs must be reloaded.
  void gc_completed_windows(WindowIndex keep_from);
  WindowIndex floor() const { return floor_; }

  const WindowSpec& spec() const { return spec_; }
  const Lattice& zero() const { return zero_; }
  const Membership& members() const { return members_; }
  const ReplicaId& self() const { return self_; }
  const std::map<WindowIndex, Lattice>& windows() const { return windows_; }
  const std::map<ReplicaId, Timestamp>& progress() const { return progress_; }
  Timestamp own_watermark() const { return own_watermark_; }

  // Shared state only; this is what replicas exchange.
  void encode_snapshot(ByteWriter& out) const;
  static WindowedCrdt decode_snapshot(ByteReader& in);
  // Snapshot plus own contributions; used for checkpoints.
  void encode(ByteWriter& out) const;
  static WindowedCrdt decode(ByteReader& in);

  // Compares the shared lattice state (spec, zero, members, windows,
  // progress, floor). Owner and own contributions are not part of the lattice.
  friend bool operator==(const WindowedCrdt& a, const WindowedCrdt& b);

 private:
  void collect(WindowIndex floor);

  WindowSpec spec_;
  Lattice zero_;
  Membership members_;
  ReplicaId self_;
  std::map<WindowIndex, Lattice> windows_;
  std::map<ReplicaId, Timestamp> progress_;
  WindowIndex floor_ = 0;
  std::map<WindowIndex, Lattice> own_windows_;
  Timestamp own_watermark_ = 0;
};

WindowedCrdt join(WindowedCrdt a, const WindowedCrdt& b);

// Partition-local windowed aggregate: completeness depends only on the local
// watermark, and there is nothing to merge.
class WindowedLocal {
 public:
  WindowedLocal(WindowSpec spec, Lattice zero);

  void insert(const Update& element, Timestamp ts);
  void increment_watermark(Timestamp ts);
  Timestamp watermark() const { return watermark_; }
  bool is_complete(WindowIndex w) const;
  std::optional<Value> window_value(WindowIndex w) const;
  void gc_completed_windows(WindowIndex keep_from);

  const WindowSpec& spec() const { return spec_; }
  const std::map<WindowIndex, Lattice>& windows() const { return windows_; }

  void encode(ByteWriter& out) const;
  static WindowedLocal decode(ByteReader& in);

  friend bool operator==(const WindowedLocal&, const WindowedLocal&) = default;

 private:
  WindowSpec spec_;
  Lattice zero_;
  std::map<WindowIndex, Lattice> windows_;
  Timestamp watermark_ = 0;
};

// Plain partition-local value, checkpointed with the rest of the state.
class Local {
 public:
  Local(std::int64_t v) : v_(v) {}
  Local(std::string v) : v_(std::move(v)) {}

  std::int64_t as_int() const;
  const std::string& as_string() const;

  void encode(ByteWriter& out) const;
  static Local decode(ByteReader& in);

  friend bool operator==(const Local&, const Local&) = default;

 private:
  std::variant<std::int64_t, std::string> v_;
};

}  // namespace holon
