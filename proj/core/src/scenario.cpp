#include "holon/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "holon/errors.hpp"

namespace holon {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

void check_keys(const YAML::Node& node, const std::string& where, std::initializer_list<std::string_view> allowed) {
  if (!node.IsMap()) throw UsageError(where + " must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw UsageError("unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read(const YAML::Node& parent, const char* key, T& out, const std::string& where) {
  const auto node = parent[key];
  if (!node) return;
  try {
    out = node.as<T>();
  } catch (const YAML::Exception&) {
    throw UsageError(where + "." + key + ": bad value '" + YAML::Dump(node) + "'");
  }
}

void read_node_fields(const YAML::Node& n, NodeConfig& cfg, const std::string& where) {
  check_keys(n, where,
             {"batch_size", "checkpoint_every", "sync_every", "heartbeat_every", "steal_every", "steal_stale_after"});
  read(n, "batch_size", cfg.batch_size, where);
  read(n, "checkpoint_every", cfg.checkpoint_every, where);
  read(n, "sync_every", cfg.sync_every, where);
  read(n, "heartbeat_every", cfg.heartbeat_every, where);
  read(n, "steal_every", cfg.steal_every, where);
  read(n, "steal_stale_after", cfg.steal_stale_after, where);
}

ScenarioConfig from_yaml(const YAML::Node& root) {
  if (!root || root.IsNull()) throw UsageError("empty scenario");
  check_keys(root, "scenario",
             {"workload", "driver", "seed", "generator", "nodes", "assignment", "failures", "failure_scenario", "sim",
              "threaded", "measure_window_latency", "compute_sensitivity"});
  ScenarioConfig cfg;
  if (root["workload"]) cfg.workload = parse_workload(root["workload"].as<std::string>());
  if (root["driver"]) cfg.driver = parse_driver(root["driver"].as<std::string>());
  read(root, "seed", cfg.seed, "scenario");
  read(root, "measure_window_latency", cfg.measure_window_latency, "scenario");
  read(root, "compute_sensitivity", cfg.compute_sensitivity, "scenario");

  if (auto g = root["generator"]) {
    const std::string w = "generator";
    check_keys(g, w,
               {"partitions", "events_per_partition", "window_length", "category_count", "price_min", "price_max",
                "bid_fraction", "auction_count", "events_per_second", "close_streams"});
    auto& gen = cfg.generator;
    read(g, "partitions", gen.partitions, w);
    read(g, "events_per_partition", gen.events_per_partition, w);
    read(g, "window_length", gen.window_length, w);
    read(g, "category_count", gen.category_count, w);
    read(g, "price_min", gen.price_min, w);
    read(g, "price_max", gen.price_max, w);
    read(g, "bid_fraction", gen.bid_fraction, w);
    read(g, "auction_count", gen.auction_count, w);
    read(g, "events_per_second", gen.events_per_second, w);
    read(g, "close_streams", gen.close_streams, w);
  }

  std::uint32_t count = 1;
  NodeConfig defaults;
  std::map<std::string, YAML::Node> overrides;
  if (auto n = root["nodes"]) {
    check_keys(n, "nodes", {"count", "defaults", "overrides"});
    read(n, "count", count, "nodes");
    if (n["defaults"]) read_node_fields(n["defaults"], defaults, "nodes.defaults");
    if (auto o = n["overrides"]) {
      if (!o.IsMap()) throw UsageError("nodes.overrides must be a mapping");
      for (const auto& kv : o) overrides[kv.first.as<std::string>()] = kv.second;
    }
  }
  if (count == 0) throw UsageError("nodes.count must be positive");
  cfg.nodes = make_nodes(count, defaults, cfg.generator.partitions);
  for (const auto& [id, fields] : overrides) {
    auto it = std::find_if(cfg.nodes.begin(), cfg.nodes.end(), [&](const NodeConfig& c) { return c.id == id; });
    if (it == cfg.nodes.end()) throw UsageError("nodes.overrides names unknown node " + id);
    read_node_fields(fields, *it, "nodes.overrides." + id);
  }

  if (auto a = root["assignment"]) {
    if (!a.IsMap()) throw UsageError("assignment must be a mapping of node to partitions");
    for (auto& node : cfg.nodes) node.initial_partitions.clear();
    for (const auto& kv : a) {
      const auto id = kv.first.as<std::string>();
      auto it = std::find_if(cfg.nodes.begin(), cfg.nodes.end(), [&](const NodeConfig& c) { return c.id == id; });
      if (it == cfg.nodes.end()) throw UsageError("assignment names unknown node " + id);
      if (!kv.second.IsSequence()) throw UsageError("assignment." + id + " must be a list");
      for (const auto& p : kv.second) it->initial_partitions.emplace_back(p.as<std::string>());
    }
  }

  if (root["failures"] && root["failure_scenario"])
    throw UsageError("give either failures or failure_scenario, not both");
  if (auto f = root["failures"]) {
    if (!f.IsSequence()) throw UsageError("failures must be a list");
    for (const auto& item : f) {
      check_keys(item, "failures[]", {"node", "stop_at", "restart_at"});
      FailureEvent e;
      read(item, "node", e.node, "failures[]");
      read(item, "stop_at", e.stop_at, "failures[]");
      if (item["restart_at"]) e.restart_at = item["restart_at"].as<double>();
      cfg.failures.push_back(e);
    }
  }
  if (auto f = root["failure_scenario"]) {
    check_keys(f, "failure_scenario", {"kind", "nodes", "at", "restart_after", "gap"});
    FailurePlan plan;
    if (f["kind"]) plan.kind = parse_failure_kind(f["kind"].as<std::string>());
    read(f, "nodes", plan.nodes, "failure_scenario");
    read(f, "at", plan.at, "failure_scenario");
    read(f, "restart_after", plan.restart_after, "failure_scenario");
    read(f, "gap", plan.gap, "failure_scenario");
    cfg.failures = expand(plan);
  }

  if (auto s = root["sim"]) {
    check_keys(s, "sim", {"tick_ms", "max_ticks", "network_delay", "steps_per_tick"});
    read(s, "tick_ms", cfg.sim.tick_ms, "sim");
    read(s, "max_ticks", cfg.sim.max_ticks, "sim");
    read(s, "network_delay", cfg.sim.network_delay, "sim");
    read(s, "steps_per_tick", cfg.sim.steps_per_tick, "sim");
  }
  if (auto t = root["threaded"]) {
    check_keys(t, "threaded", {"max_seconds", "ingest_rate", "ingest_chunk", "network_delay_ms"});
    read(t, "max_seconds", cfg.threaded.max_seconds, "threaded");
    read(t, "ingest_rate", cfg.threaded.ingest_rate, "threaded");
    read(t, "ingest_chunk", cfg.threaded.ingest_chunk, "threaded");
    read(t, "network_delay_ms", cfg.threaded.network_delay_ms, "threaded");
  }

  apply_seed(cfg, cfg.seed);
  cfg.validate();
  return cfg;
}

}  // namespace

DriverKind parse_driver(std::string_view name) {
  if (name == "sim") return DriverKind::sim;
  if (name == "threaded") return DriverKind::threaded;
  throw UsageError("unknown driver '" + std::string(name) + "' (expected sim or threaded)");
}

std::string_view to_string(DriverKind d) { return d == DriverKind::sim ? "sim" : "threaded"; }

FailureKind parse_failure_kind(std::string_view name) {
  if (name == "none") return FailureKind::none;
  if (name == "concurrent") return FailureKind::concurrent;
  if (name == "subsequent") return FailureKind::subsequent;
  if (name == "crash") return FailureKind::crash;
  throw UsageError("unknown failure kind '" + std::string(name) + "'");
}

std::string_view to_string(FailureKind k) {
  switch (k) {
    case FailureKind::none: return "none";
    case FailureKind::concurrent: return "concurrent";
    case FailureKind::subsequent: return "subsequent";
    case FailureKind::crash: return "crash";
  }
  return "?";
}

std::vector<FailureEvent> expand(const FailurePlan& plan) {
  std::vector<FailureEvent> out;
  if (plan.kind == FailureKind::none) return out;
  if (plan.nodes.empty()) throw UsageError("failure plan names no nodes");
  for (std::size_t i = 0; i < plan.nodes.size(); ++i) {
    FailureEvent e;
    e.node = plan.nodes[i];
    e.stop_at = plan.at + (plan.kind == FailureKind::subsequent ? plan.gap * static_cast<double>(i) : 0.0);
    if (plan.kind != FailureKind::crash) e.restart_at = e.stop_at + plan.restart_after;
    out.push_back(e);
  }
  return out;
}

void ScenarioConfig::validate() const {
  generator.validate();
  if (nodes.empty()) throw UsageError("scenario needs at least one node");
  std::set<std::string> ids;
  std::set<PartitionId> covered;
  const auto all = partitions();
  const std::set<PartitionId> known(all.begin(), all.end());
  for (const auto& n : nodes) {
    n.validate();
    if (!ids.insert(n.id).second) throw UsageError("duplicate node id " + n.id);
    for (const auto& p : n.initial_partitions) {
      if (!known.contains(p)) throw UsageError("node " + n.id + " is assigned unknown partition " + p.str());
      covered.insert(p);
    }
  }
  for (const auto& p : all)
    if (!covered.contains(p)) throw UsageError("partition " + p.str() + " is not assigned to any node");

  const double horizon = driver == DriverKind::sim ? static_cast<double>(sim.max_ticks) : threaded.max_seconds;
  for (const auto& f : failures) {
    if (!ids.contains(f.node)) throw UsageError("failure names unknown node " + f.node);
    if (f.stop_at < 0 || f.stop_at >= horizon) throw UsageError("failure of " + f.node + " is outside the run horizon");
    if (f.restart_at && *f.restart_at <= f.stop_at)
      throw UsageError("failure of " + f.node + " restarts before it stops");
    if (driver == DriverKind::sim &&
        (f.stop_at != std::floor(f.stop_at) || (f.restart_at && *f.restart_at != std::floor(*f.restart_at))))
      throw UsageError("sim failure times are whole ticks");
  }
  if (sim.tick_ms == 0 || sim.max_ticks == 0 || sim.steps_per_tick == 0)
    throw UsageError("sim tick_ms, max_ticks and steps_per_tick must be positive");
  if (!(threaded.max_seconds > 0) || threaded.ingest_chunk == 0)
    throw UsageError("threaded max_seconds and ingest_chunk must be positive");
}

std::vector<PartitionId> ScenarioConfig::partitions() const { return nexmark::partition_ids(generator.partitions); }

std::vector<NodeConfig> make_nodes(std::uint32_t count, const NodeConfig& defaults, std::uint32_t partitions) {
  std::vector<NodeConfig> out;
  const auto ids = nexmark::partition_ids(partitions);
  for (std::uint32_t i = 0; i < count; ++i) {
    NodeConfig n = defaults;
    n.id = "n" + std::to_string(i);
    n.initial_partitions.clear();
    for (std::uint32_t p = i; p < partitions; p += count) n.initial_partitions.push_back(ids[p]);
    out.push_back(std::move(n));
  }
  return out;
}

void apply_seed(ScenarioConfig& cfg, std::uint64_t seed) {
  cfg.seed = seed;
  cfg.generator.seed = seed;
  for (std::size_t i = 0; i < cfg.nodes.size(); ++i) cfg.nodes[i].seed = splitmix64(seed ^ splitmix64(i + 1));
}

ScenarioConfig parse_scenario(std::string_view yaml) {
  try {
    return from_yaml(YAML::Load(std::string(yaml)));
  } catch (const YAML::Exception& e) {
    throw UsageError(std::string("scenario: ") + e.what());
  }
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read scenario " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace holon
