#include "holon/windowed.hpp"

#include <algorithm>
#include <limits>

#include "holon/errors.hpp"

namespace holon {

namespace {

const ReplicaId& local_replica() {
  static const ReplicaId id("local");
  return id;
}

void encode_windows(ByteWriter& out, const std::map<WindowIndex, Lattice>& windows) {
  out.u32(static_cast<std::uint32_t>(windows.size()));
  for (const auto& [w, value] : windows) {
    out.u64(w);
    value.encode(out);
  }
}

std::map<WindowIndex, Lattice> decode_windows(ByteReader& in, LatticeKind kind) {
  std::map<WindowIndex, Lattice> windows;
  const auto n = in.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto w = in.u64();
    auto value = Lattice::decode(in);
    if (value.kind() != kind) throw DecodeError("window lattice kind does not match zero");
    if (!windows.empty() && w <= windows.rbegin()->first) throw DecodeError("non-canonical windows");
    windows.emplace_hint(windows.end(), w, std::move(value));
  }
  return windows;
}

ReplicaId decode_replica(ByteReader& in) {
  auto s = in.str();
  if (s.empty()) throw DecodeError("empty replica id");
  return ReplicaId(std::move(s));
}

void drop_before(std::map<WindowIndex, Lattice>& windows, WindowIndex keep_from) {
  windows.erase(windows.begin(), windows.lower_bound(keep_from));
}

}  // namespace

// WindowSpec

WindowSpec::WindowSpec(std::uint64_t length, Timestamp origin) : length_(length), origin_(origin) {
  if (length_ == 0) throw UsageError("window length must be >= 1");
}

WindowIndex WindowSpec::window_of(Timestamp ts) const {
  if (ts < origin_) throw UsageError("timestamp precedes window origin");
  return (ts - origin_) / length_;
}

Timestamp WindowSpec::window_start(WindowIndex w) const { return origin_ + w * length_; }

Timestamp WindowSpec::window_end(WindowIndex w) const { return origin_ + (w + 1) * length_; }

WindowIndex WindowSpec::closed_by(Timestamp watermark) const {
  return watermark < origin_ ? 0 : (watermark - origin_) / length_;
}

void WindowSpec::encode(ByteWriter& out) const {
  out.u64(length_);
  out.u64(origin_);
}

WindowSpec WindowSpec::decode(ByteReader& in) {
  const auto length = in.u64();
  const auto origin = in.u64();
  if (length == 0) throw DecodeError("zero window length");
  return WindowSpec(length, origin);
}

// WindowedCrdt

WindowedCrdt::WindowedCrdt(WindowSpec spec, Lattice zero, Membership members, ReplicaId self)
    : spec_(spec), zero_(std::move(zero)), members_(std::move(members)), self_(std::move(self)) {
  if (members_.empty()) throw UsageError("windowed CRDT needs at least one member");
  if (!members_.contains(self_)) throw UsageError("replica " + self_.str() + " is not a member");
}

void WindowedCrdt::insert(const Update& element, Timestamp ts) {
  if (ts < own_watermark_) {
    throw LateEventError("insert at " + std::to_string(ts) + " below watermark " +
                         std::to_string(own_watermark_) + " of " + self_.str());
  }
  const auto w = spec_.window_of(ts);
  // Collected windows are final everywhere; replaying into them is a no-op.
  if (w < floor_) return;
  auto own = own_windows_.try_emplace(w, zero_).first;
  own->second.apply(element, self_);
  auto shared = windows_.try_emplace(w, zero_).first;
  shared->second.merge(own->second);
}

void WindowedCrdt::increment_watermark(Timestamp ts) {
  own_watermark_ = std::max(own_watermark_, ts);
  auto [it, inserted] = progress_.try_emplace(self_, ts);
  if (!inserted && it->second < ts) it->second = ts;
}

Timestamp WindowedCrdt::global_watermark() const {
  Timestamp gw = std::numeric_limits<Timestamp>::max();
  for (const auto& member : members_) {
    auto it = progress_.find(member);
    gw = std::min(gw, it == progress_.end() ? Timestamp{0} : it->second);
  }
  return gw;
}

bool WindowedCrdt::is_complete(WindowIndex w) const {
  return w >= floor_ && w < spec_.closed_by(global_watermark());
}

std::optional<Value> WindowedCrdt::window_value(WindowIndex w) const {
  if (!is_complete(w)) return std::nullopt;
  auto it = windows_.find(w);
  return it == windows_.end() ? zero_.value() : it->second.value();
}

void WindowedCrdt::merge(const WindowedCrdt& other) {
  if (!(spec_ == other.spec_)) throw UsageError("merge across different window specs");
  if (zero_.kind() != other.zero_.kind()) throw UsageError("merge across different lattice kinds");
  if (members_ != other.members_) throw UsageError("merge across different memberships");
  if (&other == this) return;
  if (other.floor_ > floor_) collect(other.floor_);
  for (const auto& [w, value] : other.windows_) {
    if (w < floor_) continue;
    auto [it, inserted] = windows_.try_emplace(w, value);
    if (!inserted) it->second.merge(value);
  }
  for (const auto& [replica, ts] : other.progress_) {
    auto [it, inserted] = progress_.try_emplace(replica, ts);
    if (!inserted && it->second < ts) it->second = ts;
  }
}

void WindowedCrdt::gc_completed_windows(WindowIndex keep_from) {
  const auto closed = spec_.closed_by(global_watermark());
  if (keep_from > closed) {
    throw UsageError("cannot drop window " + std::to_string(keep_from - 1) + ": only " +
                     std::to_string(closed) + " windows are complete");
  }
  if (keep_from > floor_) collect(keep_from);
}

void WindowedCrdt::collect(WindowIndex floor) {
  floor_ = floor;
  drop_before(windows_, floor);
  drop_before(own_windows_, floor);
}

void WindowedCrdt::encode_snapshot(ByteWriter& out) const {
  spec_.encode(out);
  zero_.encode(out);
  out.u32(static_cast<std::uint32_t>(members_.size()));
  for (const auto& m : members_) out.str(m.str());
  out.str(self_.str());
  encode_windows(out, windows_);
  out.u32(static_cast<std::uint32_t>(progress_.size()));
  for (const auto& [replica, ts] : progress_) {
    out.str(replica.str());
    out.u64(ts);
  }
  out.u64(floor_);
}

WindowedCrdt WindowedCrdt::decode_snapshot(ByteReader& in) {
  auto spec = WindowSpec::decode(in);
  auto zero = Lattice::decode(in);
  Membership members;
  const auto n = in.u32();
  for (std::uint32_t i = 0; i < n; ++i) members.insert(decode_replica(in));
  if (members.size() != n) throw DecodeError("duplicate member");
  auto self = decode_replica(in);
  if (!members.contains(self) || members.empty()) throw DecodeError("owner is not a member");

  WindowedCrdt out(spec, std::move(zero), std::move(members), std::move(self));
  out.windows_ = decode_windows(in, out.zero_.kind());
  const auto p = in.u32();
  for (std::uint32_t i = 0; i < p; ++i) {
    auto replica = decode_replica(in);
    const auto ts = in.u64();
    if (!out.members_.contains(replica)) throw DecodeError("progress for non-member");
    if (!out.progress_.emplace(std::move(replica), ts).second) throw DecodeError("duplicate progress");
  }
  out.floor_ = in.u64();
  if (!out.windows_.empty() && out.windows_.begin()->first < out.floor_)
    throw DecodeError("window below the collection floor");
  return out;
}

void WindowedCrdt::encode(ByteWriter& out) const {
  encode_snapshot(out);
  encode_windows(out, own_windows_);
  out.u64(own_watermark_);
}

WindowedCrdt WindowedCrdt::decode(ByteReader& in) {
  auto out = decode_snapshot(in);
  out.own_windows_ = decode_windows(in, out.zero_.kind());
  out.own_watermark_ = in.u64();
  return out;
}

bool operator==(const WindowedCrdt& a, const WindowedCrdt& b) {
  return a.spec_ == b.spec_ && a.zero_ == b.zero_ && a.members_ == b.members_ &&
         a.windows_ == b.windows_ && a.progress_ == b.progress_ && a.floor_ == b.floor_;
}

WindowedCrdt join(WindowedCrdt a, const WindowedCrdt& b) {
  a.merge(b);
  return a;
}

// WindowedLocal

WindowedLocal::WindowedLocal(WindowSpec spec, Lattice zero) : spec_(spec), zero_(std::move(zero)) {}

void WindowedLocal::insert(const Update& element, Timestamp ts) {
  if (ts < watermark_) {
    throw LateEventError("local insert at " + std::to_string(ts) + " below watermark " +
                         std::to_string(watermark_));
  }
  windows_.try_emplace(spec_.window_of(ts), zero_).first->second.apply(element, local_replica());
}

void WindowedLocal::increment_watermark(Timestamp ts) { watermark_ = std::max(watermark_, ts); }

bool WindowedLocal::is_complete(WindowIndex w) const { return w < spec_.closed_by(watermark_); }

std::optional<Value> WindowedLocal::window_value(WindowIndex w) const {
  if (!is_complete(w)) return std::nullopt;
  auto it = windows_.find(w);
  return it == windows_.end() ? zero_.value() : it->second.value();
}

void WindowedLocal::gc_completed_windows(WindowIndex keep_from) {
  if (keep_from > spec_.closed_by(watermark_)) throw UsageError("cannot drop incomplete local window");
  drop_before(windows_, keep_from);
}

void WindowedLocal::encode(ByteWriter& out) const {
  spec_.encode(out);
  zero_.encode(out);
  encode_windows(out, windows_);
  out.u64(watermark_);
}

WindowedLocal WindowedLocal::decode(ByteReader& in) {
  auto spec = WindowSpec::decode(in);
  WindowedLocal out(spec, Lattice::decode(in));
  out.windows_ = decode_windows(in, out.zero_.kind());
  out.watermark_ = in.u64();
  return out;
}

// Local

std::int64_t Local::as_int() const {
  if (auto* v = std::get_if<std::int64_t>(&v_)) return *v;
  throw UsageError("local value is not an integer");
}

const std::string& Local::as_string() const {
  if (auto* v = std::get_if<std::string>(&v_)) return *v;
  throw UsageError("local value is not a string");
}

void Local::encode(ByteWriter& out) const {
  out.u8(static_cast<std::uint8_t>(v_.index()));
  if (auto* v = std::get_if<std::int64_t>(&v_)) {
    out.i64(*v);
  } else {
    out.str(std::get<std::string>(v_));
  }
}

Local Local::decode(ByteReader& in) {
  switch (in.u8()) {
    case 0: return Local(in.i64());
    case 1: return Local(in.str());
    default: throw DecodeError("bad local value tag");
  }
}

}  // namespace holon
