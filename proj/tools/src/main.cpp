#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "hiermech/harness.hpp"
#include "hiermech/mechtree.hpp"

namespace {

int cmd_enumerate(int level, bool force_large, bool with_tree) {
  nlohmann::json out;
  out["level"] = level;
  if (level <= 5) {
    out["family_size"] = hiermech::grid_family_size(level);
  } else {
    out["family_size"] = nullptr;
  }
  std::uint64_t streamed = 0;
  hiermech::for_each_grid(
      level, [&streamed](const hiermech::GridMechanism&) { ++streamed; }, force_large);
  out["streamed"] = streamed;
  if (with_tree) {
    const auto tree = hiermech::MechanismTree::build(level, force_large);
    out["tree"] = tree.summary();
  }
  fmt::print("{}\n", out.dump(2));
  return 0;
}

int cmd_verify(const std::string& suite, std::uint64_t seed) {
  nlohmann::json out;
  bool pass = true;
  if (suite == "all") {
    out = nlohmann::json::array();
    for (const auto& name : hiermech::verify_suite_names()) {
      nlohmann::json result = hiermech::run_verify_suite(name, seed);
      pass = pass && result.at("pass").get<bool>();
      out.push_back(std::move(result));
    }
  } else {
    out = hiermech::run_verify_suite(suite, seed);
    pass = out.at("pass").get<bool>();
  }
  fmt::print("{}\n", out.dump(2));
  return pass ? 0 : 1;
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed,
            std::optional<std::string> out_dir, bool force_large) {
  std::ifstream in(config_path);
  if (!in) {
    fmt::print(stderr, "cannot read config {}\n", config_path);
    return 2;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  hiermech::ExperimentConfig cfg =
      hiermech::ExperimentConfig::from_json(nlohmann::json::parse(ss.str()));
  if (seed) cfg.master_seed = *seed;
  if (out_dir) cfg.out_dir = *out_dir;
  if (force_large) cfg.force_large = true;
  const hiermech::ExperimentResult result = hiermech::run_experiment(cfg);
  fmt::print("{}\n", result.summary.dump(2));
  return 0;
}

int cmd_report(const std::string& dir) {
  const nlohmann::json result = hiermech::check_report(dir);
  fmt::print("{}\n", result.dump(2));
  return result.at("pass").get<bool>() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grid-mechanism learning lab: enumeration, self-checks, experiments"};
  app.require_subcommand(1);

  auto* enumerate = app.add_subcommand("enumerate", "Count mechanisms and show tree structure");
  int level = 2;
  bool force_large = false;
  bool with_tree = false;
  enumerate->add_option("--level", level, "Grid refinement level")->capture_default_str();
  enumerate->add_flag("--force-large", force_large, "Allow the level-4 streaming sweep");
  enumerate->add_flag("--tree", with_tree, "Include the refinement-tree summary");

  auto* verify = app.add_subcommand("verify", "Run a seeded self-check suite");
  std::string suite;
  std::uint64_t seed = 1;
  verify->add_option("suite", suite, "Suite name or 'all'")->required();
  verify->add_option("--seed", seed, "RNG seed")->capture_default_str();

  auto* run = app.add_subcommand("run", "Run an experiment from a JSON config");
  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  std::optional<std::string> out_override;
  bool run_force_large = false;
  run->add_option("--config", config_path, "Config JSON path")->required();
  run->add_option("--seed", seed_override, "Override master_seed");
  run->add_option("--out", out_override, "Override out_dir");
  run->add_flag("--force-large", run_force_large, "Override force_large");

  auto* report = app.add_subcommand("report", "Re-derive and audit an experiment directory");
  std::string report_dir;
  report->add_option("dir", report_dir, "Experiment output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (enumerate->parsed()) return cmd_enumerate(level, force_large, with_tree);
    if (verify->parsed()) return cmd_verify(suite, seed);
    if (run->parsed()) return cmd_run(config_path, seed_override, out_override, run_force_large);
    if (report->parsed()) return cmd_report(report_dir);
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
  return 0;
}
