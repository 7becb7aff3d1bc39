#include "holon/partition_state.hpp"

#include "holon/errors.hpp"

namespace holon {

namespace {

template <class Map>
auto& lookup(Map& map, const std::string& name, const char* what) {
  auto it = map.find(name);
  if (it == map.end()) throw UsageError(std::string("undeclared ") + what + " '" + name + "'");
  return it->second;
}

template <class T>
void encode_named(ByteWriter& out, const std::map<std::string, T>& map) {
  out.u32(static_cast<std::uint32_t>(map.size()));
  for (const auto& [name, value] : map) {
    out.str(name);
    value.encode(out);
  }
}

template <class T>
std::map<std::string, T> decode_named(ByteReader& in) {
  std::map<std::string, T> map;
  const auto n = in.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    auto name = in.str();
    if (!map.emplace(name, T::decode(in)).second) throw DecodeError("duplicate state name " + name);
  }
  return map;
}

}  // namespace

WindowedCrdt& HandlerState::wcrdt(const std::string& name) { return lookup(wcrdts, name, "wcrdt"); }
const WindowedCrdt& HandlerState::wcrdt(const std::string& name) const {
  return lookup(wcrdts, name, "wcrdt");
}
WindowedLocal& HandlerState::wlocal(const std::string& name) { return lookup(wlocals, name, "wlocal"); }
Local& HandlerState::local(const std::string& name) { return lookup(locals, name, "local"); }
const Local& HandlerState::local(const std::string& name) const { return lookup(locals, name, "local"); }

void HandlerState::encode(ByteWriter& out) const {
  encode_named(out, wcrdts);
  encode_named(out, wlocals);
  encode_named(out, locals);
}

HandlerState HandlerState::decode(ByteReader& in) {
  HandlerState s;
  s.wcrdts = decode_named<WindowedCrdt>(in);
  s.wlocals = decode_named<WindowedLocal>(in);
  s.locals = decode_named<Local>(in);
  return s;
}

void PartitionState::encode(ByteWriter& out) const {
  out.u64(idx);
  out.u64(odx);
  state.encode(out);
}

std::string PartitionState::encode() const {
  ByteWriter w;
  encode(w);
  return std::move(w).bytes();
}

PartitionState PartitionState::decode(ByteReader& in) {
  PartitionState s;
  s.idx = in.u64();
  s.odx = in.u64();
  s.state = HandlerState::decode(in);
  return s;
}

PartitionState PartitionState::decode(std::string_view bytes) {
  ByteReader in(bytes);
  auto s = decode(in);
  in.expect_done();
  return s;
}

}  // namespace holon
