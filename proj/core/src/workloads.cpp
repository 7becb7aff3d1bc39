#include "holon/workloads.hpp"

#include <algorithm>
#include <charconv>
#include <random>

#include "holon/errors.hpp"

namespace holon {

namespace {

using nexmark::Event;
using nexmark::EventKind;

constexpr std::uint64_t kScale = 1'000'000;

__extension__ typedef unsigned __int128 u128;

Event event_of(const Record& r) { return nexmark::parse_event(r.payload); }

// Emits every window in [closed_by(prevWatermark), ..) for which `ready`
// holds, then records the new emission frontier.
template <class Ready, class Emit>
void emit_complete(const WindowSpec& spec, HandlerState& state, const char* prev_name, Ready ready,
                   Emit emit) {
  auto& prev = state.local(prev_name);
  WindowIndex w = spec.closed_by(static_cast<Timestamp>(prev.as_int()));
  while (ready(w)) emit(w++);
  prev = Local(static_cast<std::int64_t>(spec.window_start(w)));
}

WindowIndex frontier(const WindowSpec& spec, const HandlerState& state, const char* prev_name) {
  return spec.closed_by(static_cast<Timestamp>(state.local(prev_name).as_int()));
}

std::uint64_t parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw DecodeError("bad number '" + std::string(s) + "'");
  return v;
}

}  // namespace

Workload parse_workload(std::string_view name) {
  if (name == "q0") return Workload::q0;
  if (name == "q1") return Workload::q1;
  if (name == "q4") return Workload::q4;
  if (name == "q7") return Workload::q7;
  if (name == "nondeterministic") return Workload::nondeterministic;
  throw UsageError("unknown workload '" + std::string(name) + "' (expected q0, q1, q4, q7)");
}

std::string_view to_string(Workload w) {
  switch (w) {
    case Workload::q0: return "q0";
    case Workload::q1: return "q1";
    case Workload::q4: return "q4";
    case Workload::q7: return "q7";
    case Workload::nondeterministic: return "nondeterministic";
  }
  return "?";
}

std::unique_ptr<Handler> make_handler(Workload w, const WindowSpec& spec) {
  switch (w) {
    case Workload::q0: return std::make_unique<PassThroughHandler>(spec);
    case Workload::q1: return std::make_unique<BidRatioHandler>(spec);
    case Workload::q4: return std::make_unique<CategoryAverageHandler>(spec);
    case Workload::q7: return std::make_unique<HighestBidHandler>(spec);
    case Workload::nondeterministic: return std::make_unique<NondeterministicHandler>(spec);
  }
  throw UsageError("unknown workload");
}

std::string format_ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return "0.000000";
  const u128 scaled = static_cast<u128>(num) * kScale;
  u128 q = scaled / den;
  const u128 r = scaled % den;
  if (2 * r > den || (2 * r == den && (q & 1) != 0)) ++q;
  const auto whole = static_cast<std::uint64_t>(q / kScale);
  auto frac = std::to_string(static_cast<std::uint64_t>(q % kScale));
  return std::to_string(whole) + "." + std::string(6 - frac.size(), '0') + frac;
}

std::string bid_key(std::uint64_t bid_id) {
  auto digits = std::to_string(bid_id);
  return std::string(20 - digits.size(), '0') + digits;
}

Record to_input_record(const nexmark::Event& e) { return Record{nexmark::format_event(e), std::nullopt}; }

std::vector<Record> to_input_records(const std::vector<nexmark::Event>& events) {
  std::vector<Record> out;
  out.reserve(events.size());
  for (const auto& e : events) out.push_back(to_input_record(e));
  return out;
}

std::string render_output(const Record& r) {
  if (!r.tag) throw UsageError("cannot render an untagged output record");
  return r.tag->partition.str() + "," + std::to_string(r.tag->window) + "," + r.payload;
}

bool OutputDeduplicator::accept(const Record& r) {
  if (!r.tag) throw UsageError("cannot deduplicate an untagged record");
  auto [it, inserted] = seen_.try_emplace(*r.tag, r.payload);
  if (!inserted && it->second != r.payload) {
    throw DeterminismViolation("conflicting outputs for " + render_output(Record{it->second, r.tag}) +
                               " vs payload '" + r.payload + "'");
  }
  return inserted;
}

// --- q0 ---

std::vector<Record> PassThroughHandler::run_batch(const PartitionId& self, HandlerState&,
                                                  std::span<const Record> input) const {
  std::vector<Record> out;
  out.reserve(input.size());
  for (const auto& r : input) {
    const auto e = event_of(r);
    out.push_back(Record{r.payload, RecordTag{self, spec_.window_of(e.ts), std::to_string(e.bid_id)}});
  }
  return out;
}

// --- q1 ---

HandlerState BidRatioHandler::initial_state(const PartitionId& self, const Membership& members) const {
  HandlerState s;
  s.wcrdts.emplace(kTotal, WindowedCrdt(spec_, GCounter{}, members, self));
  s.wlocals.emplace(kLocal, WindowedLocal(spec_, GCounter{}));
  s.locals.emplace(kPrev, Local(0));
  return s;
}

std::vector<Record> BidRatioHandler::run_batch(const PartitionId& self, HandlerState& state,
                                               std::span<const Record> input) const {
  auto& total = state.wcrdt(kTotal);
  auto& local = state.wlocal(kLocal);
  for (const auto& r : input) {
    const auto e = event_of(r);
    if (e.kind == EventKind::bid) {
      total.insert(Update::increment(1), e.ts);
      local.insert(Update::increment(1), e.ts);
    }
    // Every event advances event time, bids or not.
    total.increment_watermark(e.ts);
    local.increment_watermark(e.ts);
  }

  std::vector<Record> out;
  emit_complete(
      spec_, state, kPrev, [&](WindowIndex w) { return total.is_complete(w) && local.is_complete(w); },
      [&](WindowIndex w) {
        const auto all = total.window_value(w)->count();
        const auto mine = local.window_value(w)->count();
        out.push_back(Record{format_ratio(mine, all), RecordTag{self, w, ""}});
      });
  // The partition-private counts can go once emitted; shared windows are
  // collected by the runtime.
  local.gc_completed_windows(frontier(spec_, state, kPrev));
  return out;
}

std::optional<WindowIndex> BidRatioHandler::next_window(const HandlerState& state) const {
  return frontier(spec_, state, kPrev);
}

// --- q4 ---

HandlerState CategoryAverageHandler::initial_state(const PartitionId& self, const Membership& members) const {
  HandlerState s;
  s.wcrdts.emplace(kPrices, WindowedCrdt(spec_, MapLattice{}, members, self));
  s.locals.emplace(kPrev, Local(0));
  return s;
}

std::vector<Record> CategoryAverageHandler::run_batch(const PartitionId& self, HandlerState& state,
                                                      std::span<const Record> input) const {
  auto& prices = state.wcrdt(kPrices);
  for (const auto& r : input) {
    const auto e = event_of(r);
    if (e.kind == EventKind::bid) {
      const auto cat = std::to_string(e.category);
      prices.insert(Update::at({cat, "count"}, Update::increment(1)), e.ts);
      prices.insert(Update::at({cat, "sum"}, Update::increment(e.price)), e.ts);
    }
    prices.increment_watermark(e.ts);
  }

  std::vector<Record> out;
  emit_complete(
      spec_, state, kPrev, [&](WindowIndex w) { return prices.is_complete(w); },
      [&](WindowIndex w) {
        const auto value = *prices.window_value(w);
        std::vector<std::pair<std::uint64_t, const Value*>> cats;
        for (const auto& [key, v] : value.entries()) cats.emplace_back(parse_u64(key), &v);
        std::sort(cats.begin(), cats.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        for (const auto& [cat, v] : cats) {
          const auto* count = v->find("count");
          const auto* sum = v->find("sum");
          const auto key = std::to_string(cat);
          out.push_back(Record{key + "," + format_ratio(sum ? sum->count() : 0, count ? count->count() : 0),
                               RecordTag{self, w, key}});
        }
      });
  return out;
}

std::optional<WindowIndex> CategoryAverageHandler::next_window(const HandlerState& state) const {
  return frontier(spec_, state, kPrev);
}

// --- q7 ---

HandlerState HighestBidHandler::initial_state(const PartitionId& self, const Membership& members) const {
  HandlerState s;
  s.wcrdts.emplace(kHighest, WindowedCrdt(spec_, MaxRegister{}, members, self));
  s.locals.emplace(kPrev, Local(0));
  return s;
}

std::vector<Record> HighestBidHandler::run_batch(const PartitionId& self, HandlerState& state,
                                                 std::span<const Record> input) const {
  auto& highest = state.wcrdt(kHighest);
  for (const auto& r : input) {
    const auto e = event_of(r);
    if (e.kind == EventKind::bid)
      highest.insert(Update::offer(static_cast<std::int64_t>(e.price), bid_key(e.bid_id)), e.ts);
    highest.increment_watermark(e.ts);
  }

  std::vector<Record> out;
  emit_complete(
      spec_, state, kPrev, [&](WindowIndex w) { return highest.is_complete(w); },
      [&](WindowIndex w) {
        const auto value = *highest.window_value(w);
        const auto& best = value.best();
        std::string payload = "none";
        if (best) payload = std::to_string(best->score) + "," + std::to_string(parse_u64(best->tiebreak));
        out.push_back(Record{std::move(payload), RecordTag{self, w, ""}});
      });
  return out;
}

std::optional<WindowIndex> HighestBidHandler::next_window(const HandlerState& state) const {
  return frontier(spec_, state, kPrev);
}

// --- fixture ---

std::vector<Record> NondeterministicHandler::run_batch(const PartitionId& self, HandlerState&,
                                                       std::span<const Record> input) const {
  static thread_local std::random_device entropy;
  std::vector<Record> out;
  for (const auto& r : input) {
    const auto e = event_of(r);
    out.push_back(Record{r.payload + "," + std::to_string(entropy()),
                         RecordTag{self, spec_.window_of(e.ts), std::to_string(e.bid_id)}});
  }
  return out;
}

}  // namespace holon
