// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. `acceptance_test 3 5` runs a subset.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "holon/errors.hpp"
#include "holon/harness.hpp"
#include "holon/reports.hpp"
#include "holon/scenario.hpp"
#include "support/generators.hpp"
#include "support/interleavings.hpp"

using namespace holon;
using namespace holon::testkit;

namespace {

using Seconds = std::chrono::duration<double>;

struct Outcome {
  bool pass = true;
  std::string detail;
};

double since(std::chrono::steady_clock::time_point start) {
  return Seconds(std::chrono::steady_clock::now() - start).count();
}

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// --- 1: lattice laws ---

template <typename T>
std::uint64_t law_failures(int cases, std::uint64_t seed, const std::function<T(Gen&)>& make) {
  Gen g(seed);
  std::uint64_t failures = 0;
  for (int i = 0; i < cases; ++i) {
    const auto a = make(g), b = make(g), c = make(g);
    if (!(join(a, b) == join(b, a))) ++failures;
    if (!(join(join(a, b), c) == join(a, join(b, c)))) ++failures;
    if (!(join(a, a) == a)) ++failures;
  }
  return failures;
}

Outcome lattice_laws() {
  constexpr int cases = 1000;
  const auto start = std::chrono::steady_clock::now();
  std::map<std::string, std::uint64_t> failures;
  failures["GCounter"] = law_failures<GCounter>(cases, 11, [](Gen& g) { return g.gcounter(); });
  failures["MaxRegister"] = law_failures<MaxRegister>(cases, 12, [](Gen& g) { return g.max_register(); });
  // Entries of one map share a nested kind, so each nesting gets its own run.
  failures["MapLattice"] = law_failures<MapLattice>(cases, 13, [](Gen& g) {
    return g.map_lattice(LatticeKind::gcounter, 2);
  }) + law_failures<MapLattice>(cases, 15, [](Gen& g) { return g.map_lattice(LatticeKind::max_register, 2); });
  // Replicas of one deployment, so membership and spec agree.
  failures["WindowedCrdt"] = 0;
  {
    Gen g(14);
    const WindowSpec spec(10);
    const std::vector<LatticeKind> kinds{LatticeKind::gcounter, LatticeKind::max_register, LatticeKind::map};
    for (int i = 0; i < cases; ++i) {
      const auto kind = kinds[static_cast<std::size_t>(i) % kinds.size()];
      const auto m = members(g.uniform(1, 3));
      auto rs = wcrdt_replicas(g, kind, m, spec);
      const auto pick = [&] { return rs[g.uniform(0, rs.size() - 1)]; };
      const auto a = pick(), b = pick(), c = pick();
      auto& f = failures["WindowedCrdt"];
      try {
        if (!(join(a, b) == join(b, a))) ++f;
        if (!(join(join(a, b), c) == join(a, join(b, c)))) ++f;
        if (!(join(a, a) == a)) ++f;
      } catch (const std::exception&) {
        ++f;
      }
    }
  }
  const double elapsed = since(start);
  Outcome o;
  std::uint64_t total = 0;
  for (const auto& [name, n] : failures) {
    total += n;
    o.detail += name + " " + std::to_string(n) + " failures, ";
  }
  o.detail += std::to_string(cases) + " cases each, " + fixed(elapsed) + " s";
  o.pass = total == 0 && elapsed < 10;
  return o;
}

// --- 2: interleaving oracle ---

std::vector<InterleavingCase> largest_cases() {
  // Six updates spread over three replicas and both windows.
  std::vector<InterleavingCase> out;
  Gen g(99);
  for (auto kind : {LatticeKind::gcounter, LatticeKind::max_register, LatticeKind::map}) {
    InterleavingCase c;
    c.kind = kind;
    c.replicas = 3;
    const std::vector<std::pair<std::size_t, Timestamp>> plan{{0, 1}, {0, 12}, {1, 4}, {1, 15}, {2, 9}, {2, 10}};
    for (const auto& [r, ts] : plan) c.updates.push_back(PlannedUpdate{r, ts, g.update_for(kind)});
    out.push_back(std::move(c));
  }
  return out;
}

Outcome interleaving_oracle() {
  const auto start = std::chrono::steady_clock::now();
  InterleavingStats stats;
  auto cases = interleaving_cases(2024, 20);
  for (auto& c : largest_cases()) cases.push_back(std::move(c));
  for (const auto& c : cases) explore(c, stats);
  const double elapsed = since(start);
  Outcome o;
  o.pass = stats.divergences == 0 && stats.failures.empty() && elapsed < 60;
  o.detail = std::to_string(stats.cases) + " cases, " + std::to_string(stats.states) + " states, " +
             std::to_string(stats.reads) + " reads, " + std::to_string(stats.divergences) + " divergences, " +
             fixed(elapsed) + " s";
  if (!stats.failures.empty()) o.detail += "; first: " + stats.failures.front();
  return o;
}

// --- shared scenario shapes ---

constexpr Clock kStaleAfter = 50;
constexpr std::uint64_t kStealEvery = 10;

ScenarioConfig five_node_scenario(Workload w, std::uint64_t events_per_partition) {
  ScenarioConfig cfg;
  cfg.workload = w;
  cfg.generator.partitions = 5;
  cfg.generator.events_per_partition = events_per_partition;
  cfg.generator.events_per_second = 1000;
  NodeConfig defaults;
  defaults.steal_every = kStealEvery;
  defaults.steal_stale_after = kStaleAfter;
  cfg.nodes = make_nodes(5, defaults, cfg.generator.partitions);
  cfg.sim.tick_ms = 10;
  cfg.sim.max_ticks = 50'000;
  return cfg;
}

std::vector<FailureEvent> failures(FailureKind kind, double at, double restart_after, double gap) {
  FailurePlan plan;
  plan.kind = kind;
  plan.nodes = {"n1", "n2"};
  plan.at = at;
  plan.restart_after = restart_after;
  plan.gap = gap;
  return expand(plan);
}

// --- 3: exactly once ---

Outcome exactly_once() {
  constexpr int seeds = 20;
  const auto start = std::chrono::steady_clock::now();
  int runs = 0, mismatches = 0, violations = 0, incomplete = 0;
  std::string first;
  for (auto w : {Workload::q1, Workload::q4, Workload::q7}) {
    for (auto kind : {FailureKind::none, FailureKind::concurrent, FailureKind::subsequent, FailureKind::crash}) {
      for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
        auto cfg = five_node_scenario(w, 400);
        cfg.failures = failures(kind, 60, 100, 40);
        apply_seed(cfg, seed);
        ++runs;
        const auto label = std::string(to_string(w)) + "/" + std::string(to_string(kind)) + "/seed " +
                           std::to_string(seed);
        try {
          const auto r = run_once(cfg);
          const auto expected = sequential_oracle(w, nexmark::generate(cfg.generator), cfg.window_spec());
          if (!r.completed) {
            ++incomplete;
            if (first.empty()) first = label + " incomplete";
          }
          const auto d = diff_outputs(r.outputs, expected);
          if (!d.equal) {
            ++mismatches;
            if (first.empty()) first = label + ": " + d.differences.front();
          }
        } catch (const DeterminismViolation& e) {
          ++violations;
          if (first.empty()) first = label + ": " + e.what();
        }
      }
    }
  }
  Outcome o;
  o.pass = mismatches == 0 && violations == 0 && incomplete == 0;
  o.detail = std::to_string(runs) + " runs, " + std::to_string(mismatches) + " mismatches, " +
             std::to_string(violations) + " determinism violations, " + std::to_string(incomplete) +
             " incomplete, " + fixed(since(start)) + " s";
  if (!first.empty()) o.detail += "; first: " + first;
  return o;
}

// --- 4: recovery liveness ---

Outcome recovery_liveness(const std::filesystem::path& data) {
  auto cfg = load_scenario(data / "q7_crash.yaml");
  cfg.compute_sensitivity = false;
  Outcome o;
  if (cfg.failures.size() != 2 || cfg.nodes.size() != 5 || cfg.failures[0].restart_at) {
    o.pass = false;
    o.detail = "q7_crash.yaml is not a crash of 2 of 5 nodes";
    return o;
  }
  const auto crash_at = static_cast<Clock>(cfg.failures[0].stop_at);
  const auto stale = cfg.nodes.front().steal_stale_after;
  // A steal cycle is steal_every node steps, in ticks.
  const Clock steal = (cfg.nodes.front().steal_every + cfg.sim.steps_per_tick - 1) / cfg.sim.steps_per_tick;
  const Clock bound = crash_at + stale + 2 * steal;

  std::set<PartitionId> orphaned;
  for (const auto& n : cfg.nodes)
    for (const auto& f : cfg.failures)
      if (n.id == f.node) orphaned.insert(n.initial_partitions.begin(), n.initial_partitions.end());

  SimulatedDeployment d(cfg);
  // Highest own watermark any orphaned partition reached before the crash.
  // Past it, the global watermark needs a new owner for every orphan.
  Timestamp frozen = 0;
  while (d.now() < crash_at) {
    d.step();
    for (const auto& p : orphaned) frozen = std::max(frozen, d.live_own_watermark(p).value_or(0));
  }
  std::optional<Clock> resumed;
  while (!d.finished() && d.now() < cfg.sim.max_ticks) {
    d.step();
    if (!resumed && d.live_global_watermark().value_or(0) > frozen) resumed = d.now();
  }
  const auto r = d.result();
  const auto expected = sequential_oracle(cfg.workload, d.log(), cfg.window_spec());
  const bool outputs_match = diff_outputs(r.outputs, expected).equal;

  o.pass = resumed && *resumed <= bound && r.completed && outputs_match;
  o.detail = "crash at tick " + std::to_string(crash_at) + ", global watermark past " + std::to_string(frozen) +
             " at tick " + (resumed ? std::to_string(*resumed) : std::string("never")) + " (bound " +
             std::to_string(bound) + "), " + std::to_string(r.events_generated) + " events, " +
             std::to_string(r.windows) + " windows " + (r.completed ? "complete" : "incomplete") +
             (outputs_match ? "" : ", outputs differ from the oracle");
  return o;
}

// --- 5: sensitivity ordering ---

Outcome sensitivity_ordering() {
  // Restart delay d is longer than stealStaleAfter, so restartable
  // scenarios may not exceed a crash with the same stop times.
  constexpr double at = 300, restart_after = 200, gap = 100;
  static_assert(kStaleAfter < restart_after);
  Outcome o;
  const auto step = 0.01;
  std::string detail;
  for (std::uint64_t seed : {1, 2, 3}) {
    auto base = five_node_scenario(Workload::q7, 2000);
    apply_seed(base, seed);
    auto with = [&](std::vector<FailureEvent> f) {
      auto cfg = base;
      cfg.failures = std::move(f);
      return run_once(cfg);
    };
    auto crashes_like = [](std::vector<FailureEvent> f) {
      for (auto& e : f) e.restart_at.reset();
      return f;
    };
    const auto none_a = with({});
    const auto none_b = with({});
    const auto concurrent_f = failures(FailureKind::concurrent, at, restart_after, gap);
    const auto subsequent_f = failures(FailureKind::subsequent, at, restart_after, gap);
    const auto spec = base.window_spec();
    auto sens = [&](const RunResult& r) { return latency_sensitivity(r, none_a, spec, step).area; };

    const double s_none = latency_sensitivity(none_b, none_a, spec, step).area;
    const double s_conc = sens(with(concurrent_f));
    const double s_subs = sens(with(subsequent_f));
    const double s_crash = sens(with(failures(FailureKind::crash, at, restart_after, gap)));
    const double s_conc_crash = sens(with(crashes_like(concurrent_f)));
    const double s_subs_crash = sens(with(crashes_like(subsequent_f)));

    const bool ok = s_none == 0 && s_conc > 0 && s_conc <= s_conc_crash && s_subs <= s_subs_crash;
    o.pass = o.pass && ok;
    detail += "seed " + std::to_string(seed) + ": none " + fixed(s_none, 4) + " concurrent " + fixed(s_conc, 4) +
              " subsequent " + fixed(s_subs, 4) + " crash " + fixed(s_crash, 4) + " (same stops: " +
              fixed(s_conc_crash, 4) + ", " + fixed(s_subs_crash, 4) + "); ";
  }
  // Shown, not asserted: a restart delay shorter than stealStaleAfter.
  {
    auto base = five_node_scenario(Workload::q7, 2000);
    apply_seed(base, 1);
    const auto none = run_once(base);
    auto cfg = base;
    cfg.failures = failures(FailureKind::concurrent, at, 20, gap);
    const double quick = latency_sensitivity(run_once(cfg), none, base.window_spec(), step).area;
    detail += "restart after 20 ticks: concurrent " + fixed(quick, 4) + "; ";
  }
  o.detail = detail + "stealStaleAfter " + std::to_string(kStaleAfter) + " < restart delay " +
             fixed(restart_after, 0);
  return o;
}

// --- 6: deterministic replay ---

// FNV-1a over every report file, in path order.
std::uint64_t hash_tree(const std::filesystem::path& dir, std::vector<std::filesystem::path>& files) {
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(std::filesystem::relative(e.path(), dir));
  std::sort(files.begin(), files.end());
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
  };
  for (const auto& f : files) {
    std::ifstream in(dir / f, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    mix(f.generic_string());
    mix(s.str());
  }
  return h;
}

// Report hash of q7_crash.yaml at seed 7. Any behavioral change to the sim
// driver moves it.
constexpr std::uint64_t kFrozenReplayHash = 0x7fb47455f6c1bbcfull;

Outcome deterministic_replay(const std::filesystem::path& data) {
  const auto root = std::filesystem::temp_directory_path() / ("holon-replay-" + std::to_string(std::random_device{}()));
  auto cfg = load_scenario(data / "q7_crash.yaml");
  apply_seed(cfg, 7);
  std::vector<std::uint64_t> hashes;
  std::vector<std::vector<std::filesystem::path>> listings;
  for (int i = 0; i < 2; ++i) {
    const auto dir = root / std::to_string(i);
    write_reports(run_scenario(cfg), dir);
    listings.emplace_back();
    hashes.push_back(hash_tree(dir, listings.back()));
  }
  std::filesystem::remove_all(root);
  Outcome o;
  char hex[32];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(hashes[0]));
  o.pass = hashes[0] == hashes[1] && listings[0] == listings[1] && hashes[0] == kFrozenReplayHash;
  o.detail = std::to_string(listings[0].size()) + " files, run hashes " + (hashes[0] == hashes[1] ? "equal" : "differ") +
             ", hash " + hex + (hashes[0] == kFrozenReplayHash ? " matches" : " does not match") +
             " the frozen value";
  return o;
}

// --- 7: partition-count invariance ---

// Window -> global result lines with the partition column dropped, checked
// to agree across every partition.
std::optional<std::map<std::string, std::vector<std::string>>> global_results(const OutputLines& out) {
  std::optional<std::map<std::string, std::vector<std::string>>> agreed;
  for (const auto& [p, lines] : out) {
    std::map<std::string, std::vector<std::string>> by_window;
    for (const auto& line : lines) {
      const auto a = line.find(',');
      const auto b = line.find(',', a + 1);
      by_window[line.substr(a + 1, b - a - 1)].push_back(line.substr(b + 1));
    }
    if (agreed && *agreed != by_window) return std::nullopt;
    agreed = std::move(by_window);
  }
  return agreed;
}

Outcome partition_invariance() {
  Outcome o;
  nexmark::GeneratorConfig gen;
  gen.seed = 31;
  gen.partitions = 10;
  gen.events_per_partition = 300;
  gen.events_per_second = 1000;
  const auto stream = nexmark::generate_stream(gen);
  for (auto w : {Workload::q4, Workload::q7}) {
    std::optional<std::map<std::string, std::vector<std::string>>> reference;
    for (std::uint32_t parts : {1u, 2u, 5u, 10u}) {
      ScenarioConfig cfg;
      cfg.workload = w;
      cfg.generator = gen;
      cfg.generator.partitions = parts;
      cfg.generator.events_per_partition = stream.size() / parts;
      NodeConfig defaults;
      cfg.nodes = make_nodes(std::min(parts, 3u), defaults, parts);
      cfg.sim.max_ticks = 50'000;
      apply_seed(cfg, 31);
      const auto log = nexmark::split(stream, parts, cfg.window_spec(), true);
      SimulatedDeployment d(cfg, log);
      d.run();
      const auto r = d.result();
      const auto global = global_results(r.outputs);
      const auto label = std::string(to_string(w)) + " with " + std::to_string(parts) + " partitions";
      if (!r.completed || !global) {
        o.pass = false;
        o.detail += label + (r.completed ? " has partitions that disagree; " : " did not complete; ");
        continue;
      }
      if (!reference) {
        reference = global;
      } else if (*reference != *global) {
        o.pass = false;
        o.detail += label + " differs from 1 partition; ";
      }
    }
    if (reference) o.detail += std::string(to_string(w)) + " " + std::to_string(reference->size()) + " windows; ";
  }
  o.detail += std::to_string(stream.size()) + " events over 1, 2, 5, 10 partitions";
  return o;
}

// --- 8: throughput smoke ---

Outcome throughput_smoke() {
  ScenarioConfig cfg;
  cfg.workload = Workload::q7;
  cfg.driver = DriverKind::threaded;
  cfg.generator.partitions = 4;
  cfg.generator.events_per_partition = 250'000;
  cfg.generator.events_per_second = 10'000;
  NodeConfig defaults;
  defaults.batch_size = 1024;
  cfg.nodes = make_nodes(4, defaults, cfg.generator.partitions);
  cfg.threaded.max_seconds = 300;
  apply_seed(cfg, 8);
  const auto start = std::chrono::steady_clock::now();
  const auto log = nexmark::generate(cfg.generator);
  const auto r = run_threaded(cfg, log);
  const double elapsed = since(start);
  std::uint64_t total = 0;
  for (const auto& b : r.metrics.throughput) total += b.events;
  const bool outputs_match = diff_outputs(r.outputs, sequential_oracle(cfg.workload, log, cfg.window_spec())).equal;
  Outcome o;
  o.pass = r.completed && elapsed < 300 && total == r.events_generated && outputs_match;
  o.detail = std::to_string(r.events_generated) + " events generated, throughput total " + std::to_string(total) +
             ", " + (r.completed ? "completed" : "incomplete") + " in " + fixed(elapsed) + " s" +
             (outputs_match ? "" : ", outputs differ from the oracle");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::filesystem::path data = HOLON_TEST_DATA;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"lattice laws", lattice_laws},
      {"windowed determinism oracle", interleaving_oracle},
      {"exactly once under failure", exactly_once},
      {"recovery liveness", [&] { return recovery_liveness(data); }},
      {"latency sensitivity ordering", sensitivity_ordering},
      {"deterministic replay", [&] { return deterministic_replay(data); }},
      {"partition-count invariance", partition_invariance},
      {"throughput smoke", throughput_smoke},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int n = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(n)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("threw: ") + e.what();
    }
    if (!o.pass) ++failed;
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", n, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
