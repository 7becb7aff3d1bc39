#include "holon/lattice.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "holon/errors.hpp"

namespace holon {

namespace {

constexpr std::uint8_t kMaxAbsent = 0;
constexpr std::uint8_t kMaxPresent = 1;

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  if (a > std::numeric_limits<std::uint64_t>::max() - b)
    throw std::overflow_error("grow-only counter overflow");
  return a + b;
}

auto entry_less = [](const auto& entry, std::string_view key) { return entry.first < key; };

}  // namespace

ReplicaId::ReplicaId(std::string id) : id_(std::move(id)) {
  if (id_.empty()) throw UsageError("replica id must be non-empty");
}

// GCounter

void GCounter::increment(const ReplicaId& replica, std::uint64_t amount) {
  if (amount == 0) return;
  // Every slot is bounded by the sum, so checking the sum covers both.
  (void)checked_add(value(), amount);
  counts_[replica] += amount;
}

void GCounter::merge(const GCounter& other) {
  for (const auto& [replica, n] : other.counts_) {
    auto [it, inserted] = counts_.try_emplace(replica, n);
    if (!inserted) it->second = std::max(it->second, n);
  }
}

std::uint64_t GCounter::value() const {
  std::uint64_t sum = 0;
  for (const auto& [_, n] : counts_) sum = checked_add(sum, n);
  return sum;
}

std::uint64_t GCounter::count(const ReplicaId& replica) const {
  auto it = counts_.find(replica);
  return it == counts_.end() ? 0 : it->second;
}

// MaxRegister

bool outranks(const MaxEntry& a, const MaxEntry& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.tiebreak < b.tiebreak;
}

void MaxRegister::offer(MaxEntry entry) {
  if (!best_ || outranks(entry, *best_)) best_ = std::move(entry);
}

void MaxRegister::merge(const MaxRegister& other) {
  if (other.best_) offer(*other.best_);
}

// MapLattice

MapLattice::MapLattice() = default;
MapLattice::MapLattice(const MapLattice&) = default;
MapLattice::MapLattice(MapLattice&&) noexcept = default;
MapLattice& MapLattice::operator=(const MapLattice&) = default;
MapLattice& MapLattice::operator=(MapLattice&&) noexcept = default;
MapLattice::~MapLattice() = default;

bool operator==(const MapLattice& a, const MapLattice& b) { return a.entries_ == b.entries_; }

const Lattice* MapLattice::find(std::string_view key) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), key, entry_less);
  if (it == entries_.end() || it->first != key) return nullptr;
  return &it->second;
}

Lattice& MapLattice::slot(std::string_view key, const Lattice& if_absent) {
  if (!entries_.empty() && entries_.front().second.kind() != if_absent.kind()) {
    throw UsageError("map lattice entries must share one kind: have " +
                     std::string(to_string(entries_.front().second.kind())) + ", got " +
                     std::string(to_string(if_absent.kind())));
  }
  auto it = std::lower_bound(entries_.begin(), entries_.end(), key, entry_less);
  if (it == entries_.end() || it->first != key)
    it = entries_.emplace(it, std::string(key), if_absent);
  return it->second;
}

void MapLattice::join_entry(std::string key, const Lattice& value) {
  slot(key, value).merge(value);
}

void MapLattice::merge(const MapLattice& other) {
  if (&other == this) return;
  for (const auto& [key, value] : other.entries_) join_entry(key, value);
}

std::string_view to_string(LatticeKind kind) {
  switch (kind) {
    case LatticeKind::gcounter: return "gcounter";
    case LatticeKind::max_register: return "max_register";
    case LatticeKind::map: return "map";
  }
  return "unknown";
}

// Value

std::uint64_t Value::count() const {
  if (auto* c = std::get_if<std::uint64_t>(&v_)) return *c;
  throw UsageError("value is not a count");
}

const std::optional<MaxEntry>& Value::best() const {
  if (auto* b = std::get_if<std::optional<MaxEntry>>(&v_)) return *b;
  throw UsageError("value is not a max entry");
}

const Value::Entries& Value::entries() const {
  if (auto* e = std::get_if<Entries>(&v_)) return *e;
  throw UsageError("value is not a map");
}

const Value* Value::find(std::string_view key) const {
  const auto& e = entries();
  auto it = std::lower_bound(e.begin(), e.end(), key, entry_less);
  if (it == e.end() || it->first != key) return nullptr;
  return &it->second;
}

// Lattice

void Lattice::merge(const Lattice& other) {
  if (kind() != other.kind()) {
    throw UsageError("cannot merge " + std::string(to_string(kind())) + " with " +
                     std::string(to_string(other.kind())));
  }
  std::visit(
      [&other](auto& self) {
        using T = std::decay_t<decltype(self)>;
        self.merge(std::get<T>(other.v_));
      },
      v_);
}

void Lattice::apply(const Update& update, const ReplicaId& self) { apply_at(update, 0, self); }

void Lattice::apply_at(const Update& update, std::size_t depth, const ReplicaId& self) {
  if (depth < update.path.size()) {
    auto* map = std::get_if<MapLattice>(&v_);
    if (!map) throw UsageError("keyed update applied to " + std::string(to_string(kind())));
    Lattice fresh;
    if (depth + 1 < update.path.size()) {
      fresh = MapLattice{};
    } else if (std::holds_alternative<Offer>(update.op)) {
      fresh = MaxRegister{};
    }
    map->slot(update.path[depth], fresh).apply_at(update, depth + 1, self);
    return;
  }
  if (auto* inc = std::get_if<Increment>(&update.op)) {
    auto* counter = std::get_if<GCounter>(&v_);
    if (!counter) throw UsageError("increment applied to " + std::string(to_string(kind())));
    counter->increment(self, inc->amount);
    return;
  }
  auto* reg = std::get_if<MaxRegister>(&v_);
  if (!reg) throw UsageError("offer applied to " + std::string(to_string(kind())));
  reg->offer(std::get<Offer>(update.op).entry);
}

Value Lattice::value() const {
  if (auto* c = std::get_if<GCounter>(&v_)) return Value(c->value());
  if (auto* r = std::get_if<MaxRegister>(&v_)) return Value(r->best());
  Value::Entries out;
  for (const auto& [key, nested] : std::get<MapLattice>(v_).entries())
    out.emplace_back(key, nested.value());
  return Value(std::move(out));
}

void Lattice::encode(ByteWriter& out) const {
  out.u8(static_cast<std::uint8_t>(kind()));
  if (auto* c = std::get_if<GCounter>(&v_)) {
    out.u32(static_cast<std::uint32_t>(c->counts().size()));
    for (const auto& [replica, n] : c->counts()) {
      out.str(replica.str());
      out.u64(n);
    }
  } else if (auto* r = std::get_if<MaxRegister>(&v_)) {
    if (!r->best()) {
      out.u8(kMaxAbsent);
    } else {
      out.u8(kMaxPresent);
      out.i64(r->best()->score);
      out.str(r->best()->tiebreak);
    }
  } else {
    const auto& m = std::get<MapLattice>(v_);
    out.u32(static_cast<std::uint32_t>(m.size()));
    for (const auto& [key, nested] : m.entries()) {
      out.str(key);
      nested.encode(out);
    }
  }
}

std::string Lattice::encode() const {
  ByteWriter w;
  encode(w);
  return std::move(w).bytes();
}

Lattice Lattice::decode(ByteReader& in) {
  const auto tag = in.u8();
  switch (static_cast<LatticeKind>(tag)) {
    case LatticeKind::gcounter: {
      GCounter c;
      const auto n = in.u32();
      std::optional<std::string> prev;
      for (std::uint32_t i = 0; i < n; ++i) {
        auto id = in.str();
        const auto count = in.u64();
        if ((prev && id <= *prev) || count == 0) throw DecodeError("non-canonical gcounter");
        c.increment(ReplicaId(id), count);
        prev = std::move(id);
      }
      return c;
    }
    case LatticeKind::max_register: {
      MaxRegister r;
      const auto present = in.u8();
      if (present == kMaxPresent) {
        const auto score = in.i64();
        r.offer(MaxEntry{score, in.str()});
      } else if (present != kMaxAbsent) {
        throw DecodeError("bad max register flag");
      }
      return r;
    }
    case LatticeKind::map: {
      MapLattice m;
      const auto n = in.u32();
      std::optional<std::string> prev;
      for (std::uint32_t i = 0; i < n; ++i) {
        auto key = in.str();
        if (prev && key <= *prev) throw DecodeError("non-canonical map lattice");
        auto nested = decode(in);
        try {
          m.join_entry(key, nested);
        } catch (const UsageError& e) {
          throw DecodeError(e.what());
        }
        prev = std::move(key);
      }
      return m;
    }
  }
  throw DecodeError("unknown lattice tag " + std::to_string(tag));
}

Lattice join(Lattice a, const Lattice& b) {
  a.merge(b);
  return a;
}

}  // namespace holon
