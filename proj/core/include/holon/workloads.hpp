#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "holon/nexmark.hpp"
#include "holon/runtime.hpp"
#include "holon/stream_log.hpp"
#include "holon/windowed.hpp"

namespace holon {

enum class Workload { q0, q1, q4, q7, nondeterministic };

Workload parse_workload(std::string_view name);
std::string_view to_string(Workload w);

std::unique_ptr<Handler> make_handler(Workload w, const WindowSpec& spec);

// Nexmark Q0: every input event is forwarded, tagged with its window.
class PassThroughHandler : public Handler {
 public:
  explicit PassThroughHandler(WindowSpec spec) : spec_(spec) {}
  std::string_view name() const override { return "q0"; }
  HandlerState initial_state(const PartitionId&, const Membership&) const override { return {}; }
  std::vector<Record> run_batch(const PartitionId& self, HandlerState& state,
                                std::span<const Record> input) const override;

 private:
  WindowSpec spec_;
};

// Query 1: per window, this partition's share of all bids.
//   totalCount    = WCRDT  { zero: GCounter }
//   localCount    = WLocal { zero: GCounter }
//   prevWatermark = Local  { 0 }
class BidRatioHandler : public Handler {
 public:
  static constexpr const char* kTotal = "totalCount";
  static constexpr const char* kLocal = "localCount";
  static constexpr const char* kPrev = "prevWatermark";

  explicit BidRatioHandler(WindowSpec spec) : spec_(spec) {}
  std::string_view name() const override { return "q1"; }
  HandlerState initial_state(const PartitionId& self, const Membership& members) const override;
  std::vector<Record> run_batch(const PartitionId& self, HandlerState& state,
                                std::span<const Record> input) const override;
  std::optional<WindowIndex> next_window(const HandlerState& state) const override;

 private:
  WindowSpec spec_;
};

// Nexmark Q4 without a shuffle: a WCRDT map category -> {sum, count}.
class CategoryAverageHandler : public Handler {
 public:
  static constexpr const char* kPrices = "categoryPrices";
  static constexpr const char* kPrev = "prevWatermark";

  explicit CategoryAverageHandler(WindowSpec spec) : spec_(spec) {}
  std::string_view name() const override { return "q4"; }
  HandlerState initial_state(const PartitionId& self, const Membership& members) const override;
  std::vector<Record> run_batch(const PartitionId& self, HandlerState& state,
                                std::span<const Record> input) const override;
  std::optional<WindowIndex> next_window(const HandlerState& state) const override;

 private:
  WindowSpec spec_;
};

// Nexmark Q7: the highest bid of each window, ties to the lowest bid id.
class HighestBidHandler : public Handler {
 public:
  static constexpr const char* kHighest = "highestBid";
  static constexpr const char* kPrev = "prevWatermark";

  explicit HighestBidHandler(WindowSpec spec) : spec_(spec) {}
  std::string_view name() const override { return "q7"; }
  HandlerState initial_state(const PartitionId& self, const Membership& members) const override;
  std::vector<Record> run_batch(const PartitionId& self, HandlerState& state,
                                std::span<const Record> input) const override;
  std::optional<WindowIndex> next_window(const HandlerState& state) const override;

 private:
  WindowSpec spec_;
};

// Test fixture: pass-through that appends a random number to each output, so
// two executions of one partition disagree.
class NondeterministicHandler : public Handler {
 public:
  explicit NondeterministicHandler(WindowSpec spec) : spec_(spec) {}
  std::string_view name() const override { return "nondeterministic"; }
  HandlerState initial_state(const PartitionId&, const Membership&) const override { return {}; }
  std::vector<Record> run_batch(const PartitionId& self, HandlerState& state,
                                std::span<const Record> input) const override;

 private:
  WindowSpec spec_;
};

// num/den as a decimal with exactly 6 places, rounded half to even, computed
// in integers. A zero denominator renders as 0.
std::string format_ratio(std::uint64_t num, std::uint64_t den);

// Q7 tiebreak key: fixed-width so lexicographic order is numeric order.
std::string bid_key(std::uint64_t bid_id);

Record to_input_record(const nexmark::Event& e);
std::vector<Record> to_input_records(const std::vector<nexmark::Event>& events);

// `partition,window,payload`. Throws UsageError for untagged records.
std::string render_output(const Record& r);

// Consumer-side deduplication by record tag.
class OutputDeduplicator {
 public:
  // True the first time a tag is seen. A repeated tag with a different
  // payload throws DeterminismViolation; an untagged record throws UsageError.
  bool accept(const Record& r);
  std::size_t size() const { return seen_.size(); }

 private:
  std::map<RecordTag, std::string> seen_;
};

using OutputLines = std::map<PartitionId, std::vector<std::string>>;

// Sequential reference: folds the whole event log per window with plain
// containers and renders the lines each partition must emit, in order.
OutputLines sequential_oracle(Workload w, const nexmark::EventLog& log, const WindowSpec& spec);

}  // namespace holon
