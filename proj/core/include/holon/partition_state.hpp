#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "holon/codec.hpp"
#include "holon/windowed.hpp"

namespace holon {

// Every state instance a handler declared for one partition, by name.
struct HandlerState {
  std::map<std::string, WindowedCrdt> wcrdts;
  std::map<std::string, WindowedLocal> wlocals;
  std::map<std::string, Local> locals;

  // Lookups throw UsageError for undeclared names.
  WindowedCrdt& wcrdt(const std::string& name);
  const WindowedCrdt& wcrdt(const std::string& name) const;
  WindowedLocal& wlocal(const std::string& name);
  Local& local(const std::string& name);
  const Local& local(const std::string& name) const;

  void encode(ByteWriter& out) const;
  static HandlerState decode(ByteReader& in);
};

// (next input offset, next output offset, handler state) of one partition.
struct PartitionState {
  std::uint64_t idx = 0;
  std::uint64_t odx = 0;
  HandlerState state;

  void encode(ByteWriter& out) const;
  std::string encode() const;
  static PartitionState decode(ByteReader& in);
  static PartitionState decode(std::string_view bytes);
};

}  // namespace holon
