#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "holon/lattice.hpp"
#include "holon/windowed.hpp"

namespace holon::nexmark {

enum class EventKind : std::uint8_t { bid, other };

struct Event {
  EventKind kind = EventKind::bid;
  Timestamp ts = 0;
  std::uint64_t auction_id = 0;
  std::uint64_t price = 1;
  std::uint32_t category = 0;
  std::uint64_t bid_id = 0;

  friend bool operator==(const Event&, const Event&) = default;
};

// `kind,ts,auctionId,price,category,bidId` with kind "bid" or "other".
std::string format_event(const Event& e);
// Throws DecodeError on malformed lines.
Event parse_event(std::string_view line);

struct GeneratorConfig {
  std::uint64_t seed = 1;
  std::uint32_t partitions = 1;
  std::uint64_t events_per_partition = 0;
  // Event-time units (ms).
  std::uint64_t window_length = 1000;
  std::uint32_t category_count = 10;
  std::uint64_t price_min = 1;
  std::uint64_t price_max = 1000;
  double bid_fraction = 0.9;
  std::uint64_t auction_count = 100;
  // Global event rate in event time; sets timestamp spacing.
  std::uint64_t events_per_second = 1000;
  // End each partition with an `other` event at the end of the last window,
  // which advances every watermark far enough to close all windows.
  bool close_streams = true;

  void validate() const;
};

using EventLog = std::map<PartitionId, std::vector<Event>>;

// p0 .. p{n-1}
std::vector<PartitionId> partition_ids(std::uint32_t n);

// Global, timestamp-ordered stream of partitions * events_per_partition
// events. A pure function of the config.
std::vector<Event> generate_stream(const GeneratorConfig& cfg);

// Deals a global stream onto `partitions` partitions by bid id, keeping each
// partition timestamp-ordered, and appends closing events if requested.
EventLog split(const std::vector<Event>& stream, std::uint32_t partitions, const WindowSpec& spec,
               bool close_streams);

EventLog generate(const GeneratorConfig& cfg);

// Timestamp of the closing events: end of the window holding the last event.
Timestamp closing_timestamp(const std::vector<Event>& stream, const WindowSpec& spec);

// Number of windows the closing watermark completes.
WindowIndex window_count(const EventLog& log, const WindowSpec& spec);

}  // namespace holon::nexmark
