// Straight-line reference implementation of the workloads. Uses no lattice,
// windowed or runtime code so it can check them.

#include <algorithm>
#include <map>
#include <optional>

#include "holon/errors.hpp"
#include "holon/workloads.hpp"

namespace holon {

namespace {

using nexmark::Event;
using nexmark::EventKind;

struct Sum {
  std::uint64_t sum = 0;
  std::uint64_t count = 0;
};

struct Best {
  std::uint64_t price = 0;
  std::uint64_t bid_id = 0;
};

std::string line(const PartitionId& p, WindowIndex w, const std::string& payload) {
  return p.str() + "," + std::to_string(w) + "," + payload;
}

}  // namespace

OutputLines sequential_oracle(Workload workload, const nexmark::EventLog& log, const WindowSpec& spec) {
  const WindowIndex windows = nexmark::window_count(log, spec);
  OutputLines out;
  for (const auto& [p, _] : log) out[p];

  switch (workload) {
    case Workload::q0: {
      for (const auto& [p, events] : log)
        for (const auto& e : events) out[p].push_back(line(p, spec.window_of(e.ts), nexmark::format_event(e)));
      return out;
    }
    case Workload::q1: {
      std::map<WindowIndex, std::uint64_t> all;
      std::map<PartitionId, std::map<WindowIndex, std::uint64_t>> mine;
      for (const auto& [p, events] : log) {
        for (const auto& e : events) {
          if (e.kind != EventKind::bid) continue;
          ++all[spec.window_of(e.ts)];
          ++mine[p][spec.window_of(e.ts)];
        }
      }
      for (const auto& [p, _] : log) {
        for (WindowIndex w = 0; w < windows; ++w)
          out[p].push_back(line(p, w, format_ratio(mine[p][w], all[w])));
      }
      return out;
    }
    case Workload::q4: {
      std::map<WindowIndex, std::map<std::uint32_t, Sum>> agg;
      for (const auto& [_, events] : log) {
        for (const auto& e : events) {
          if (e.kind != EventKind::bid) continue;
          auto& s = agg[spec.window_of(e.ts)][e.category];
          s.sum += e.price;
          s.count += 1;
        }
      }
      for (const auto& [p, _] : log) {
        for (WindowIndex w = 0; w < windows; ++w) {
          for (const auto& [cat, s] : agg[w])
            out[p].push_back(line(p, w, std::to_string(cat) + "," + format_ratio(s.sum, s.count)));
        }
      }
      return out;
    }
    case Workload::q7: {
      std::map<WindowIndex, Best> best;
      for (const auto& [_, events] : log) {
        for (const auto& e : events) {
          if (e.kind != EventKind::bid) continue;
          auto [it, inserted] = best.try_emplace(spec.window_of(e.ts), Best{e.price, e.bid_id});
          auto& b = it->second;
          if (!inserted && (e.price > b.price || (e.price == b.price && e.bid_id < b.bid_id)))
            b = Best{e.price, e.bid_id};
        }
      }
      for (const auto& [p, _] : log) {
        for (WindowIndex w = 0; w < windows; ++w) {
          auto it = best.find(w);
          out[p].push_back(line(p, w,
                                it == best.end() ? std::string("none")
                                                 : std::to_string(it->second.price) + "," +
                                                       std::to_string(it->second.bid_id)));
        }
      }
      return out;
    }
    case Workload::nondeterministic:
      throw UsageError("the nondeterministic fixture has no reference output");
  }
  throw UsageError("unknown workload");
}

}  // namespace holon
