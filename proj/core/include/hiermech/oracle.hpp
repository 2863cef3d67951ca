#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hiermech/adversary.hpp"
#include "hiermech/gridmech.hpp"
#include "hiermech/learners.hpp"

namespace hiermech {

// Valuations for hindsight evaluation. Entries must be strictly inside the
// unit square and off the grid lines of the working level; on-grid
// coordinates are rejected at ingestion (they have probability zero under
// smooth draws, and ties would make cell membership ambiguous).
struct SampleSet {
  std::vector<Valuation> points;
};

// Per-edge weight tables of the lattice-path decomposition at one level:
// the horizontal edge of column c at height y collects y * b[c][y], the
// vertical edge of row r at offset x costs x * s[x][r]. Summing a staircase
// path's edges reproduces its total profit in grid units exactly.
struct EdgeWeights {
  int level = 0;
  std::vector<std::vector<std::int64_t>> b;  // [column][height]: samples at rows >= height
  std::vector<std::vector<std::int64_t>> s;  // [offset][row]: samples at columns < offset

  static EdgeWeights build(const SampleSet& samples, int level);
  std::int64_t path_value_units(const GridMechanism& m) const;
};

struct BenchmarkResult {
  GridMechanism best;
  Dyadic total;   // hindsight profit of `best` on the samples, exact
  double value = 0.0;
  double slack = 0.0;  // approximation allowance 6 * 2^-level * n / sigma
};

// Best grid mechanism in hindsight via longest-path DP over the staircase
// lattice. Ties resolve to the lexicographically largest col_levels (an empty
// sample set yields the empty mechanism). With clip_to_quadrant, only
// mechanisms allocating inside [0, 1/2] x [1/2, 1] are considered.
BenchmarkResult best_in_hindsight(const SampleSet& samples, int level, double sigma,
                                  bool clip_to_quadrant = false);

// Exact total profit of one mechanism on a sample set.
Dyadic mechanism_value(const GridMechanism& m, const SampleSet& samples);

// Monte Carlo mean profit of a general mechanism under a distribution:
// (mean, standard error).
std::pair<double, double> expected_profit_mc(const GeneralMechanism& m,
                                             const SmoothDistribution& dist,
                                             std::int64_t samples, Rng& rng);

struct RegretEntry {
  std::string algorithm;
  double final_cumulative = 0.0;
  double regret = 0.0;  // benchmark value minus cumulative
};

struct RegretReport {
  int rounds = 0;
  double sigma = 0.0;
  double benchmark_value = 0.0;
  double benchmark_slack = 0.0;
  double theorem_bound = 0.0;  // (20 / sigma) * sqrt(T) * ln T
  // (3/128) * sqrt(T); only meaningful for sigma < 1/48.
  std::optional<double> lower_bound_floor;
  std::vector<RegretEntry> entries;
};

// Cross-checks that all traces saw the same valuations, then reports realized
// regret against the benchmark along with the theory annotations.
RegretReport regret_report(
    const std::vector<std::pair<std::string, std::vector<RoundTrace>>>& traces,
    const BenchmarkResult& bench, double sigma);

double theorem_bound(std::int64_t rounds, double sigma);
std::optional<double> lower_bound_floor(std::int64_t rounds, double sigma);

}  // namespace hiermech
