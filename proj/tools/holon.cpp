#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "holon/errors.hpp"
#include "holon/harness.hpp"
#include "holon/reports.hpp"
#include "holon/scenario.hpp"

namespace {

enum Exit : int { kOk = 0, kFailed = 1, kUsage = 2, kDeterminism = 3 };

holon::ScenarioConfig load(const std::string& path, std::optional<std::uint64_t> seed,
                           const std::string& driver) {
  auto cfg = holon::load_scenario(path);
  if (seed) holon::apply_seed(cfg, *seed);
  if (!driver.empty()) cfg.driver = holon::parse_driver(driver);
  cfg.validate();
  return cfg;
}

int cmd_run(const std::string& scenario, std::uint64_t seed, const std::string& out, const std::string& driver) {
  const auto cfg = load(scenario, seed, driver);
  const auto result = holon::run_scenario(cfg);
  holon::write_reports(result, out);
  for (const auto& d : result.diagnostics) std::cerr << "diagnostic: " << d << '\n';
  if (!result.completed) {
    std::cerr << "run did not complete within the horizon\n";
    return kFailed;
  }
  std::cout << "completed " << result.windows << " windows, " << result.metrics.events_consumed << " events\n";
  return kOk;
}

int cmd_oracle(const std::string& scenario, std::optional<std::uint64_t> seed, const std::string& out) {
  const auto cfg = load(scenario, seed, "");
  const auto log = holon::nexmark::generate(cfg.generator);
  holon::write_output_dir(holon::sequential_oracle(cfg.workload, log, cfg.window_spec()), out);
  return kOk;
}

int cmd_generate(const std::string& scenario, std::optional<std::uint64_t> seed, const std::string& out) {
  const auto cfg = load(scenario, seed, "");
  const std::filesystem::path dir = std::filesystem::path(out) / "input";
  std::filesystem::create_directories(dir);
  for (const auto& [p, events] : holon::nexmark::generate(cfg.generator)) {
    std::ofstream file(dir / (p.str() + ".csv"), std::ios::binary);
    for (const auto& e : events) file << holon::nexmark::format_event(e) << '\n';
    if (!file) throw std::runtime_error("cannot write " + (dir / (p.str() + ".csv")).string());
  }
  return kOk;
}

int cmd_diff(const std::string& run_dir, const std::string& oracle_dir) {
  const auto d = holon::diff_outputs(holon::read_output_dir(run_dir), holon::read_output_dir(oracle_dir));
  for (const auto& line : d.differences) std::cout << line << '\n';
  if (!d.equal) return kFailed;
  std::cout << "outputs match\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"holon: windowed CRDT stream processing harness"};
  app.require_subcommand(1);

  std::string scenario, out, driver, run_dir, oracle_dir;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> opt_seed;

  auto* run = app.add_subcommand("run", "Run a scenario and write CSV reports");
  run->add_option("--scenario", scenario, "Scenario YAML file")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Seed for the generator and node schedulers")->required();
  run->add_option("--out", out, "Report directory")->required();
  run->add_option("--driver", driver, "Override the scenario driver")->check(CLI::IsMember({"sim", "threaded"}));

  auto* oracle = app.add_subcommand("oracle", "Write the sequential oracle's per-window results");
  oracle->add_option("--scenario", scenario, "Scenario YAML file")->required()->check(CLI::ExistingFile);
  oracle->add_option("--seed", opt_seed, "Override the scenario seed");
  oracle->add_option("--out", out, "Output directory")->required();

  auto* generate = app.add_subcommand("generate", "Write the generated input logs");
  generate->add_option("--scenario", scenario, "Scenario YAML file")->required()->check(CLI::ExistingFile);
  generate->add_option("--seed", opt_seed, "Override the scenario seed");
  generate->add_option("--out", out, "Output directory")->required();

  auto* diff = app.add_subcommand("diff", "Compare deduplicated outputs of a run against an oracle");
  diff->add_option("runDir", run_dir, "Directory written by holon run")->required();
  diff->add_option("oracleDir", oracle_dir, "Directory written by holon oracle")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*run) return cmd_run(scenario, seed, out, driver);
    if (*oracle) return cmd_oracle(scenario, opt_seed, out);
    if (*generate) return cmd_generate(scenario, opt_seed, out);
    if (*diff) return cmd_diff(run_dir, oracle_dir);
  } catch (const holon::DeterminismViolation& e) {
    std::cerr << "determinism violation: " << e.what() << '\n';
    return kDeterminism;
  } catch (const holon::UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailed;
  }
  return kUsage;
}
