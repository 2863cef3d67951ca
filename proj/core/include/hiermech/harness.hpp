#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hiermech/adversary.hpp"
#include "hiermech/learners.hpp"
#include "hiermech/oracle.hpp"

namespace hiermech {

std::uint64_t fnv1a(std::string_view data);
std::string hash_hex(std::uint64_t h);

// Write-to-temp then rename, so readers never observe partial files.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

struct AlgorithmSpec {
  std::string name;            // "hier-mech" | "flat-hedge" | "uniform-random"
  std::optional<int> height;   // hier-mech only
  std::optional<int> level;    // flat-hedge / uniform-random only

  // Grid level of the mechanisms this algorithm will offer.
  int resolved_level(int rounds) const;
};

struct ExperimentConfig {
  std::string problem = "bilateral-trade";  // or "joint-ads"
  int rounds = 64;
  int replicates = 1;
  double sigma = 1.0;
  std::string adversary_kind = "drifting-rectangle";
  std::uint64_t master_seed = 1;
  int benchmark_level = 3;
  std::vector<AlgorithmSpec> algorithms;
  std::string out_dir;  // empty: keep results in memory only
  bool force_large = false;

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;
};

struct ReplicateResult {
  int index = 0;
  std::uint64_t seed = 0;
  std::string valuations_hash;
  BenchmarkResult benchmark;  // joint-ads: value/total/slack already doubled
  std::vector<std::pair<std::string, std::vector<RoundTrace>>> traces;
  RegretReport report;
};

struct ExperimentResult {
  ExperimentConfig config;
  double sigma_certified = 1.0;  // exact min certified sigma of the sequence
  double sigma_problem = 1.0;    // what the learners face (joint-ads: /4)
  std::vector<ReplicateResult> replicates;
  nlohmann::json summary;
};

// Runs the full experiment (replicates in parallel, HIERMECH_THREADS caps the
// workers) and, when out_dir is set, persists config.json, per-replicate
// valuations.csv + trace_<algorithm>.csv, and summary.json.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Re-derives every number in an experiment directory from its raw files:
// hashes, per-round profits, cumulative sums, benchmark DP, regrets. Returns
// {"pass": bool, "problems": [...], ...}.
nlohmann::json check_report(const std::string& dir);

// Seeded self-check suites: net, claim35, hedge, truthful, dp, reduction.
std::vector<std::string> verify_suite_names();
nlohmann::json run_verify_suite(const std::string& name, std::uint64_t seed);

}  // namespace hiermech
