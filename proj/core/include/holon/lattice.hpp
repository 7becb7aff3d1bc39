#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "holon/codec.hpp"

namespace holon {

// Identity of a logical update source. Partitions are the replicas of every
// windowed CRDT, so the same type names both.
class ReplicaId {
 public:
  explicit ReplicaId(std::string id);

  const std::string& str() const noexcept { return id_; }

  friend auto operator<=>(const ReplicaId&, const ReplicaId&) = default;

 private:
  std::string id_;
};

using PartitionId = ReplicaId;

// Grow-only counter: one monotone slot per replica, value is the sum.
class GCounter {
 public:
  // Adds `amount` to the slot of `replica`. Throws std::overflow_error rather
  // than wrapping.
  void increment(const ReplicaId& replica, std::uint64_t amount);
  void merge(const GCounter& other);

  std::uint64_t value() const;
  std::uint64_t count(const ReplicaId& replica) const;
  const std::map<ReplicaId, std::uint64_t>& counts() const { return counts_; }

  friend bool operator==(const GCounter&, const GCounter&) = default;

 private:
  // Zero slots are never stored, so equal counters compare equal.
  std::map<ReplicaId, std::uint64_t> counts_;
};

struct MaxEntry {
  std::int64_t score = 0;
  std::string tiebreak;

  friend bool operator==(const MaxEntry&, const MaxEntry&) = default;
};

// Total order used by MaxRegister: higher score wins, equal scores go to the
// lexicographically smaller tiebreak.
bool outranks(const MaxEntry& a, const MaxEntry& b);

class MaxRegister {
 public:
  void offer(MaxEntry entry);
  void merge(const MaxRegister& other);

  const std::optional<MaxEntry>& best() const { return best_; }

  friend bool operator==(const MaxRegister&, const MaxRegister&) = default;

 private:
  std::optional<MaxEntry> best_;
};

class Lattice;

// Grow-only map whose entries all share one nested lattice kind. Merge is
// key union with per-key join.
class MapLattice {
 public:
  using Entries = std::vector<std::pair<std::string, Lattice>>;

  MapLattice();
  MapLattice(const MapLattice&);
  MapLattice(MapLattice&&) noexcept;
  MapLattice& operator=(const MapLattice&);
  MapLattice& operator=(MapLattice&&) noexcept;
  ~MapLattice();

  const Lattice* find(std::string_view key) const;
  // Joins `value` into the entry at `key`, creating it when absent.
  void join_entry(std::string key, const Lattice& value);
  void merge(const MapLattice& other);

  const Entries& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

  friend bool operator==(const MapLattice&, const MapLattice&);

 private:
  friend class Lattice;
  Lattice& slot(std::string_view key, const Lattice& if_absent);

  Entries entries_;  // sorted by key
};

enum class LatticeKind : std::uint8_t { gcounter = 0, max_register = 1, map = 2 };

std::string_view to_string(LatticeKind kind);

struct Increment {
  std::uint64_t amount = 0;
};

struct Offer {
  MaxEntry entry;
};

// A CRDT-specific update ("element" inserted into a window). `path` walks
// through nested map lattices; the operation applies at the leaf.
struct Update {
  std::vector<std::string> path;
  std::variant<Increment, Offer> op;

  static Update increment(std::uint64_t amount) { return {{}, Increment{amount}}; }
  static Update offer(std::int64_t score, std::string tiebreak) {
    return {{}, Offer{MaxEntry{score, std::move(tiebreak)}}};
  }
  static Update at(std::vector<std::string> path, Update leaf) {
    path.insert(path.end(), leaf.path.begin(), leaf.path.end());
    return {std::move(path), std::move(leaf.op)};
  }
};

// Read-side view of a lattice: a count, an optional max entry, or a sorted
// map of nested values.
class Value {
 public:
  using Entries = std::vector<std::pair<std::string, Value>>;

  Value(std::uint64_t count) : v_(count) {}
  Value(std::optional<MaxEntry> best) : v_(std::move(best)) {}
  Value(Entries entries) : v_(std::move(entries)) {}

  bool is_count() const { return v_.index() == 0; }
  bool is_best() const { return v_.index() == 1; }
  bool is_map() const { return v_.index() == 2; }

  // Accessors throw UsageError on the wrong alternative.
  std::uint64_t count() const;
  const std::optional<MaxEntry>& best() const;
  const Entries& entries() const;
  const Value* find(std::string_view key) const;

  friend bool operator==(const Value&, const Value&) = default;

 private:
  std::variant<std::uint64_t, std::optional<MaxEntry>, Entries> v_;
};

class Lattice {
 public:
  Lattice() = default;
  Lattice(GCounter c) : v_(std::move(c)) {}
  Lattice(MaxRegister r) : v_(std::move(r)) {}
  Lattice(MapLattice m) : v_(std::move(m)) {}

  LatticeKind kind() const { return static_cast<LatticeKind>(v_.index()); }

  // Least upper bound. Throws UsageError when the kinds differ.
  void merge(const Lattice& other);
  // Applies `update` as replica `self`. Throws UsageError when the update
  // does not fit this lattice's shape.
  void apply(const Update& update, const ReplicaId& self);

  Value value() const;

  template <class T>
  const T* get_if() const {
    return std::get_if<T>(&v_);
  }

  void encode(ByteWriter& out) const;
  static Lattice decode(ByteReader& in);
  std::string encode() const;

  friend bool operator==(const Lattice&, const Lattice&) = default;

 private:
  void apply_at(const Update& update, std::size_t depth, const ReplicaId& self);

  std::variant<GCounter, MaxRegister, MapLattice> v_;
};

// Functional form of Lattice::merge.
Lattice join(Lattice a, const Lattice& b);

}  // namespace holon
