#include "hiermech/oracle.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace hiermech {

namespace {

constexpr int kMaxDpLevel = 12;
constexpr int kMaxTableLevel = 10;

void validate_samples(const SampleSet& samples, int level) {
  for (const Valuation& v : samples.points) {
    if (!v.in_unit_square()) {
      throw std::invalid_argument("sample outside the unit square");
    }
    const double sx = std::ldexp(v.vs, level);
    const double sy = std::ldexp(v.vb, level);
    if (sx == std::floor(sx) || sy == std::floor(sy)) {
      throw std::invalid_argument(fmt::format(
          "sample ({}, {}) lies on a level-{} grid line; hindsight evaluation "
          "needs interior points",
          v.vs, v.vb, level));
    }
  }
}

}  // namespace

EdgeWeights EdgeWeights::build(const SampleSet& samples, int level) {
  if (level < 0 || level > kMaxTableLevel) {
    throw std::invalid_argument("edge-weight tables are for small levels only");
  }
  validate_samples(samples, level);
  const std::size_t n = std::size_t{1} << level;
  std::vector<std::vector<std::int64_t>> cnt(n, std::vector<std::int64_t>(n, 0));
  for (const Valuation& v : samples.points) {
    const auto c = static_cast<std::size_t>(column_of(v.vs, level));
    const auto r = static_cast<std::size_t>(row_of(v.vb, level));
    ++cnt[c][r];
  }
  EdgeWeights w;
  w.level = level;
  w.b.assign(n, std::vector<std::int64_t>(n + 1, 0));
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t y = n; y-- > 0;) {
      w.b[c][y] = w.b[c][y + 1] + cnt[c][y];
    }
  }
  w.s.assign(n + 1, std::vector<std::int64_t>(n, 0));
  for (std::size_t x = 1; x <= n; ++x) {
    for (std::size_t r = 0; r < n; ++r) {
      w.s[x][r] = w.s[x - 1][r] + cnt[x - 1][r];
    }
  }
  return w;
}

std::int64_t EdgeWeights::path_value_units(const GridMechanism& m) const {
  if (m.level() != level) {
    throw std::invalid_argument("mechanism level does not match the tables");
  }
  const std::size_t n = std::size_t{1} << level;
  std::int64_t total = 0;
  for (std::size_t c = 0; c < n; ++c) {
    const auto y = static_cast<std::size_t>(m.col_levels()[c]);
    total += static_cast<std::int64_t>(y) * b[c][y];
  }
  for (std::size_t r = 0; r < n; ++r) {
    const auto x = static_cast<std::size_t>(m.row_cross()[r]);
    total -= static_cast<std::int64_t>(x) * s[x][r];
  }
  return total;
}

Dyadic mechanism_value(const GridMechanism& m, const SampleSet& samples) {
  validate_samples(samples, m.level());
  std::int64_t units = 0;
  for (const Valuation& v : samples.points) {
    units += m.profit_units(column_of(v.vs, m.level()), row_of(v.vb, m.level()));
  }
  return Dyadic{units, m.level()};
}

BenchmarkResult best_in_hindsight(const SampleSet& samples, int level, double sigma,
                                  bool clip_to_quadrant) {
  if (level < 0 || level > kMaxDpLevel) {
    throw std::invalid_argument(fmt::format("hindsight level must be in [0, {}]", kMaxDpLevel));
  }
  if (!(sigma > 0.0 && sigma <= 1.0)) {
    throw std::invalid_argument("sigma must be in (0, 1]");
  }
  if (clip_to_quadrant && level < 1) {
    throw std::invalid_argument("quadrant clipping needs level >= 1");
  }
  validate_samples(samples, level);

  const int n = 1 << level;
  const int half = n / 2;
  const std::size_t width = static_cast<std::size_t>(n) + 1;
  std::vector<std::vector<std::int32_t>> rows_by(static_cast<std::size_t>(n));
  for (const Valuation& v : samples.points) {
    rows_by[static_cast<std::size_t>(row_of(v.vb, level))].push_back(
        static_cast<std::int32_t>(column_of(v.vs, level)));
  }

  constexpr std::int64_t kNeg = std::numeric_limits<std::int64_t>::min() / 4;
  std::vector<std::int64_t> prev(width, 0), cur(width, 0);
  std::vector<std::int64_t> brow(static_cast<std::size_t>(n), 0);  // b[c][y] at current y
  std::vector<std::int64_t> srow(width, 0);                        // s[x][y] at current y
  std::vector<std::uint8_t> up(width * width, 0);  // [y * width + x], row y = n stays "right"

  for (int y = n - 1; y >= 0; --y) {
    std::fill(srow.begin(), srow.end(), 0);
    for (const std::int32_t c : rows_by[static_cast<std::size_t>(y)]) {
      brow[static_cast<std::size_t>(c)] += 1;
      srow[static_cast<std::size_t>(c) + 1] += 1;
    }
    std::partial_sum(srow.begin(), srow.end(), srow.begin());
    for (int x = n; x >= 0; --x) {
      const bool up_ok = !clip_to_quadrant || x <= half;
      const bool right_ok =
          x < n && (!clip_to_quadrant || (y >= half && x < half));
      const std::int64_t up_val =
          up_ok ? prev[static_cast<std::size_t>(x)] -
                      static_cast<std::int64_t>(x) * srow[static_cast<std::size_t>(x)]
                : kNeg;
      const std::int64_t right_val =
          right_ok ? static_cast<std::int64_t>(y) * brow[static_cast<std::size_t>(x)] +
                         cur[static_cast<std::size_t>(x) + 1]
                   : kNeg;
      // On ties climb first: that keeps every column level as high as
      // possible, so the empty sample set resolves to the empty mechanism.
      if (up_val >= right_val) {
        cur[static_cast<std::size_t>(x)] = up_val;
        up[static_cast<std::size_t>(y) * width + static_cast<std::size_t>(x)] = 1;
      } else {
        cur[static_cast<std::size_t>(x)] = right_val;
      }
    }
    std::swap(prev, cur);
  }

  const std::int64_t best_units = prev[0];
  if (best_units <= kNeg / 2) throw std::logic_error("no feasible staircase path");

  std::vector<std::int32_t> levels;
  levels.reserve(static_cast<std::size_t>(n));
  int x = 0, y = 0;
  while (x < n || y < n) {
    if (y < n && up[static_cast<std::size_t>(y) * width + static_cast<std::size_t>(x)] == 1) {
      ++y;
    } else {
      levels.push_back(static_cast<std::int32_t>(y));
      ++x;
    }
  }

  BenchmarkResult out;
  out.best = GridMechanism(level, std::move(levels));
  out.total = mechanism_value(out.best, samples);
  if (out.total.num != best_units) {
    throw std::logic_error("edge decomposition disagrees with direct profit sum");
  }
  out.value = out.total.value();
  out.slack = 6.0 * std::ldexp(1.0, -level) * static_cast<double>(samples.points.size()) / sigma;
  return out;
}

std::pair<double, double> expected_profit_mc(const GeneralMechanism& m,
                                             const SmoothDistribution& dist,
                                             std::int64_t samples, Rng& rng) {
  if (samples < 2) throw std::invalid_argument("need at least 2 samples");
  double sum = 0.0, sumsq = 0.0;
  for (std::int64_t i = 0; i < samples; ++i) {
    const double p = m.profit(dist.sample(rng));
    sum += p;
    sumsq += p * p;
  }
  const double mean = sum / static_cast<double>(samples);
  const double var = std::max(0.0, (sumsq - sum * mean) / static_cast<double>(samples - 1));
  return {mean, std::sqrt(var / static_cast<double>(samples))};
}

double theorem_bound(std::int64_t rounds, double sigma) {
  return 20.0 / sigma * std::sqrt(static_cast<double>(rounds)) *
         std::log(static_cast<double>(rounds));
}

std::optional<double> lower_bound_floor(std::int64_t rounds, double sigma) {
  if (sigma >= 1.0 / 48.0) return std::nullopt;
  return 3.0 / 128.0 * std::sqrt(static_cast<double>(rounds));
}

RegretReport regret_report(
    const std::vector<std::pair<std::string, std::vector<RoundTrace>>>& traces,
    const BenchmarkResult& bench, double sigma) {
  if (traces.empty()) throw std::invalid_argument("no traces to report on");
  const auto& reference = traces.front().second;
  if (reference.empty()) throw std::invalid_argument("empty trace");

  RegretReport report;
  report.rounds = static_cast<int>(reference.size());
  report.sigma = sigma;
  report.benchmark_value = bench.value;
  report.benchmark_slack = bench.slack;
  report.theorem_bound = theorem_bound(report.rounds, sigma);
  report.lower_bound_floor = lower_bound_floor(report.rounds, sigma);

  for (const auto& [name, trace] : traces) {
    if (trace.size() != reference.size()) {
      throw std::invalid_argument(fmt::format("trace '{}' has a different length", name));
    }
    std::int64_t cum_units = 0;
    for (std::size_t i = 0; i < trace.size(); ++i) {
      if (!(trace[i].v == reference[i].v)) {
        throw std::invalid_argument(
            fmt::format("trace '{}' saw different valuations at round {}", name, i + 1));
      }
      if (trace[i].t != static_cast<int>(i) + 1) {
        throw std::invalid_argument(fmt::format("trace '{}' has out-of-order rounds", name));
      }
      cum_units += trace[i].profit.num;
      if (trace[i].profit.level != trace[i].cumulative.level ||
          trace[i].cumulative.num != cum_units) {
        throw std::invalid_argument(
            fmt::format("trace '{}' cumulative profit is inconsistent", name));
      }
    }
    RegretEntry e;
    e.algorithm = name;
    e.final_cumulative = trace.back().cumulative.value();
    e.regret = bench.value - e.final_cumulative;
    report.entries.push_back(std::move(e));
  }
  return report;
}

}  // namespace hiermech
