#include "holon/nexmark.hpp"

#include <algorithm>
#include <charconv>
#include <random>

#include "holon/errors.hpp"

namespace holon::nexmark {

namespace {

// rng() % n keeps the draw sequence independent of the standard library's
// distribution implementations, so logs are identical across platforms.
std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t n) { return rng() % n; }

bool draw_bernoulli(std::mt19937_64& rng, double p) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return u < p;
}

template <class T>
T parse_field(std::string_view field) {
  T v{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw DecodeError("bad numeric field '" + std::string(field) + "'");
  return v;
}

}  // namespace

std::string format_event(const Event& e) {
  std::string out = e.kind == EventKind::bid ? "bid" : "other";
  for (std::uint64_t v : {e.ts, e.auction_id, e.price, std::uint64_t{e.category}, e.bid_id}) {
    out.push_back(',');
    out += std::to_string(v);
  }
  return out;
}

Event parse_event(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (fields.size() != 6) throw DecodeError("event needs 6 fields: '" + std::string(line) + "'");
  Event e;
  if (fields[0] == "bid") {
    e.kind = EventKind::bid;
  } else if (fields[0] == "other") {
    e.kind = EventKind::other;
  } else {
    throw DecodeError("unknown event kind '" + std::string(fields[0]) + "'");
  }
  e.ts = parse_field<std::uint64_t>(fields[1]);
  e.auction_id = parse_field<std::uint64_t>(fields[2]);
  e.price = parse_field<std::uint64_t>(fields[3]);
  e.category = parse_field<std::uint32_t>(fields[4]);
  e.bid_id = parse_field<std::uint64_t>(fields[5]);
  return e;
}

void GeneratorConfig::validate() const {
  if (partitions == 0) throw UsageError("generator needs at least one partition");
  if (window_length == 0) throw UsageError("window length must be positive");
  if (category_count == 0 || auction_count == 0) throw UsageError("category and auction counts must be positive");
  if (price_min == 0 || price_max < price_min) throw UsageError("price range must be positive and non-empty");
  if (!(bid_fraction >= 0.0 && bid_fraction <= 1.0)) throw UsageError("bid fraction must be in [0, 1]");
  if (events_per_second == 0) throw UsageError("events per second must be positive");
}

std::vector<PartitionId> partition_ids(std::uint32_t n) {
  std::vector<PartitionId> out;
  out.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) out.emplace_back("p" + std::to_string(i));
  return out;
}

std::vector<Event> generate_stream(const GeneratorConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  const auto total = cfg.events_per_partition * cfg.partitions;
  std::vector<Event> out;
  out.reserve(total);
  for (std::uint64_t i = 0; i < total; ++i) {
    Event e;
    e.ts = i * 1000 / cfg.events_per_second;
    e.kind = draw_bernoulli(rng, cfg.bid_fraction) ? EventKind::bid : EventKind::other;
    e.auction_id = draw_below(rng, cfg.auction_count);
    e.price = cfg.price_min + draw_below(rng, cfg.price_max - cfg.price_min + 1);
    e.category = static_cast<std::uint32_t>(draw_below(rng, cfg.category_count));
    e.bid_id = i;
    out.push_back(e);
  }
  return out;
}

Timestamp closing_timestamp(const std::vector<Event>& stream, const WindowSpec& spec) {
  if (stream.empty()) return spec.origin();
  Timestamp last = 0;
  for (const auto& e : stream) last = std::max(last, e.ts);
  return spec.window_end(spec.window_of(last));
}

EventLog split(const std::vector<Event>& stream, std::uint32_t partitions, const WindowSpec& spec,
               bool close_streams) {
  if (partitions == 0) throw UsageError("split needs at least one partition");
  const auto ids = partition_ids(partitions);
  EventLog log;
  for (const auto& id : ids) log[id];
  for (const auto& e : stream) log.at(ids[e.bid_id % partitions]).push_back(e);
  for (auto& [_, events] : log) {
    std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.ts < b.ts; });
  }
  if (close_streams && !stream.empty()) {
    const auto close_at = closing_timestamp(stream, spec);
    std::uint64_t next_id = 0;
    for (const auto& e : stream) next_id = std::max(next_id, e.bid_id + 1);
    for (std::uint32_t k = 0; k < partitions; ++k) {
      Event closing;
      closing.kind = EventKind::other;
      closing.ts = close_at;
      closing.bid_id = next_id + k;
      log.at(ids[k]).push_back(closing);
    }
  }
  return log;
}

EventLog generate(const GeneratorConfig& cfg) {
  return split(generate_stream(cfg), cfg.partitions, WindowSpec(cfg.window_length), cfg.close_streams);
}

WindowIndex window_count(const EventLog& log, const WindowSpec& spec) {
  Timestamp last = 0;
  bool any = false;
  for (const auto& [_, events] : log) {
    for (const auto& e : events) {
      last = std::max(last, e.ts);
      any = true;
    }
  }
  return any ? spec.closed_by(last) : 0;
}

}  // namespace holon::nexmark
