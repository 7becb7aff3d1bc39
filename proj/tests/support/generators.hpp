#pragma once

// Seeded random generators for lattice values and windowed CRDT replicas.
// Shared by the unit tests and the acceptance binary.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "holon/lattice.hpp"
#include "holon/windowed.hpp"

namespace holon::testkit {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi) {
    return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng_);
  }
  std::int64_t signed_uniform(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng_);
  }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }
  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[uniform(0, v.size() - 1)];
  }
  std::mt19937_64& engine() { return rng_; }

  ReplicaId replica() { return ReplicaId("r" + std::to_string(uniform(0, 3))); }

  GCounter gcounter() {
    GCounter c;
    const auto n = uniform(0, 4);
    for (std::uint64_t i = 0; i < n; ++i) c.increment(replica(), uniform(0, 50));
    return c;
  }

  MaxEntry max_entry() {
    // Small ranges so equal scores, and so the tiebreak, come up often.
    return MaxEntry{signed_uniform(-3, 3), "b" + std::to_string(uniform(0, 5))};
  }

  MaxRegister max_register() {
    MaxRegister r;
    const auto n = uniform(0, 3);
    for (std::uint64_t i = 0; i < n; ++i) r.offer(max_entry());
    return r;
  }

  // Map of the given nested kind; depth bounds nesting of maps in maps.
  MapLattice map_lattice(LatticeKind nested, int depth = 1) {
    MapLattice m;
    const auto n = uniform(0, 4);
    for (std::uint64_t i = 0; i < n; ++i) m.join_entry("k" + std::to_string(uniform(0, 5)), lattice(nested, depth));
    return m;
  }

  Lattice lattice(LatticeKind kind, int depth = 1) {
    switch (kind) {
      case LatticeKind::gcounter: return gcounter();
      case LatticeKind::max_register: return max_register();
      case LatticeKind::map:
        return depth > 0 ? map_lattice(LatticeKind::map, depth - 1) : map_lattice(LatticeKind::gcounter, 0);
    }
    return {};
  }

  Update update_for(LatticeKind kind) {
    switch (kind) {
      case LatticeKind::gcounter: return Update::increment(uniform(0, 5));
      case LatticeKind::max_register: {
        auto e = max_entry();
        return Update::offer(e.score, e.tiebreak);
      }
      case LatticeKind::map:
        return Update::at({"k" + std::to_string(uniform(0, 3))}, Update::increment(uniform(1, 5)));
    }
    return Update::increment(0);
  }

 private:
  std::mt19937_64 rng_;
};

inline Lattice zero_of(LatticeKind kind) {
  switch (kind) {
    case LatticeKind::gcounter: return GCounter{};
    case LatticeKind::max_register: return MaxRegister{};
    case LatticeKind::map: return MapLattice{};
  }
  return {};
}

inline Membership members(std::size_t n) {
  Membership m;
  for (std::size_t i = 0; i < n; ++i) m.insert(ReplicaId("p" + std::to_string(i)));
  return m;
}

// A reachable replica state: a few rounds of partition-ordered inserts,
// watermark moves, merges with other replicas, and occasional collection of
// complete windows.
inline std::vector<WindowedCrdt> wcrdt_replicas(Gen& g, LatticeKind kind, const Membership& m,
                                                const WindowSpec& spec) {
  std::vector<WindowedCrdt> rs;
  std::vector<Timestamp> clock;
  for (const auto& id : m) {
    rs.emplace_back(spec, zero_of(kind), m, id);
    clock.push_back(0);
  }
  const auto rounds = g.uniform(1, 12);
  for (std::uint64_t i = 0; i < rounds; ++i) {
    const auto r = g.uniform(0, rs.size() - 1);
    switch (g.uniform(0, 3)) {
      case 0:
      case 1:
        clock[r] += g.uniform(0, spec.length());
        rs[r].insert(g.update_for(kind), clock[r]);
        break;
      case 2:
        clock[r] += g.uniform(0, spec.length());
        rs[r].increment_watermark(clock[r]);
        break;
      case 3: {
        rs[r].merge(rs[g.uniform(0, rs.size() - 1)]);
        const auto closed = spec.closed_by(rs[r].global_watermark());
        if (closed > 0 && g.coin(0.3)) rs[r].gc_completed_windows(g.uniform(0, closed));
        break;
      }
    }
  }
  return rs;
}

inline WindowedCrdt wcrdt(Gen& g, LatticeKind kind, const Membership& m, const WindowSpec& spec) {
  auto rs = wcrdt_replicas(g, kind, m, spec);
  return rs[g.uniform(0, rs.size() - 1)];
}

}  // namespace holon::testkit
