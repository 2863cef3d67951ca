#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "hiermech/oracle.hpp"
#include "hiermech/rng.hpp"

using namespace hiermech;

namespace {

double off_grid_coord(Rng& rng, int level) {
  for (;;) {
    const double u = rng.uniform01();
    const double s = std::ldexp(u, level);
    if (u > 0.0 && s != std::floor(s)) return u;
  }
}

SampleSet random_samples(Rng& rng, int level, int max_n) {
  SampleSet s;
  const auto n = rng.uniform_below(static_cast<std::uint64_t>(max_n) + 1);
  s.points.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    s.points.push_back({off_grid_coord(rng, level), off_grid_coord(rng, level)});
  }
  return s;
}

bool quadrant_confined(const GridMechanism& m) {
  const std::int32_t n = m.size();
  const std::int32_t half = n / 2;
  for (std::int32_t c = 0; c < n; ++c) {
    const std::int32_t lvl = m.col_levels()[static_cast<std::size_t>(c)];
    if (c < half ? lvl < half : lvl != n) return false;
  }
  return true;
}

// Exhaustive maximum with the same tie rule as the DP: lexicographically
// largest column levels among the argmax set.
std::pair<GridMechanism, Dyadic> brute_best(const SampleSet& s, int level, bool clip) {
  GridMechanism best;
  Dyadic best_val{std::numeric_limits<std::int64_t>::min(), level};
  for (const auto& m : enumerate_grid(level)) {
    if (clip && !quadrant_confined(m)) continue;
    const Dyadic val = mechanism_value(m, s);
    if (val.num >= best_val.num) {  // ascending lex scan keeps the largest tie
      best = m;
      best_val = val;
    }
  }
  return {best, best_val};
}

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("dp matches exhaustive search at level two") {
  Rng rng(314);
  for (int trial = 0; trial < 100; ++trial) {
    const auto samples = random_samples(rng, 2, 200);
    const double sigma = 0.1 + 0.9 * rng.uniform01();
    const auto got = best_in_hindsight(samples, 2, sigma);
    const auto [want_mech, want_val] = brute_best(samples, 2, false);
    CHECK_EQ(got.best, want_mech);
    CHECK_EQ(got.total, want_val);
    CHECK_EQ(got.value, want_val.value());
    CHECK_EQ(got.slack,
             6.0 * 0.25 * static_cast<double>(samples.points.size()) / sigma);
  }
}

TEST_CASE("dp matches exhaustive search at level one") {
  Rng rng(315);
  for (int trial = 0; trial < 100; ++trial) {
    const auto samples = random_samples(rng, 1, 60);
    const auto got = best_in_hindsight(samples, 1, 1.0);
    const auto [want_mech, want_val] = brute_best(samples, 1, false);
    CHECK_EQ(got.best, want_mech);
    CHECK_EQ(got.total, want_val);
  }
}

TEST_CASE("quadrant clipping matches the filtered exhaustive search") {
  Rng rng(316);
  for (int trial = 0; trial < 60; ++trial) {
    const auto samples = random_samples(rng, 2, 150);
    const auto clipped = best_in_hindsight(samples, 2, 0.5, true);
    const auto [want_mech, want_val] = brute_best(samples, 2, true);
    CHECK_EQ(clipped.best, want_mech);
    CHECK_EQ(clipped.total, want_val);
    CHECK(quadrant_confined(clipped.best));
    const auto free = best_in_hindsight(samples, 2, 0.5, false);
    CHECK(free.total.num >= clipped.total.num);
    for (int k = 0; k < 50; ++k) {
      const Valuation v{off_grid_coord(rng, 2), off_grid_coord(rng, 2)};
      if (v.vs > 0.5 || v.vb < 0.5) CHECK_FALSE(clipped.best.is_allocated(v));
    }
  }
}

TEST_CASE("known optima and tie-breaks") {
  // Two aligned samples in the top-left cell: the corner mechanism wins.
  SampleSet two;
  two.points = {{0.2, 0.9}, {0.23, 0.92}};
  const auto r = best_in_hindsight(two, 2, 1.0);
  CHECK_EQ(r.best, GridMechanism(2, {3, 4, 4, 4}));
  CHECK_EQ(r.total, (Dyadic{4, 2}));
  CHECK_EQ(r.value, 1.0);

  // A single sample can at best break even, and the tie resolves to the
  // lexicographically largest option: never trading.
  SampleSet one;
  one.points = {{0.3, 0.8}};
  const auto t = best_in_hindsight(one, 1, 1.0);
  CHECK_EQ(t.best, empty_mechanism(1));
  CHECK_EQ(t.total.num, 0);

  // No samples at all resolves to the empty mechanism with zero slack.
  const auto e = best_in_hindsight(SampleSet{}, 3, 0.5);
  CHECK_EQ(e.best, empty_mechanism(3));
  CHECK_EQ(e.total, (Dyadic{0, 3}));
  CHECK_EQ(e.slack, 0.0);
}

TEST_CASE("edge weights reproduce every mechanism value") {
  Rng rng(317);
  for (int trial = 0; trial < 40; ++trial) {
    const int level = 1 + static_cast<int>(rng.uniform_below(3));
    const auto samples = random_samples(rng, level, 120);
    const auto w = EdgeWeights::build(samples, level);
    CHECK_EQ(w.level, level);
    const auto n = std::size_t{1} << level;
    std::vector<std::int32_t> ls(n);
    for (int k = 0; k < 25; ++k) {
      for (auto& v : ls) v = static_cast<std::int32_t>(rng.uniform_below(n + 1));
      std::sort(ls.begin(), ls.end());
      const GridMechanism m(level, ls);
      const Dyadic direct = mechanism_value(m, samples);
      CHECK_EQ(direct.level, level);
      CHECK_EQ(w.path_value_units(m), direct.num);
    }
  }
  const auto w1 = EdgeWeights::build(SampleSet{}, 1);
  CHECK_THROWS_AS(w1.path_value_units(GridMechanism(2, {0, 1, 2, 3})), std::invalid_argument);
  CHECK_THROWS_AS(EdgeWeights::build(SampleSet{}, 11), std::invalid_argument);
}

TEST_CASE("on-grid and out-of-square samples are rejected") {
  const GridMechanism m1(1, {1, 2});
  SampleSet s;
  s.points = {{0.5, 0.7}};  // on the level-1 line
  CHECK_THROWS_AS(mechanism_value(m1, s), std::invalid_argument);
  CHECK_THROWS_AS(best_in_hindsight(s, 1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(EdgeWeights::build(s, 1), std::invalid_argument);

  s.points = {{0.25, 0.7}};
  CHECK_EQ(mechanism_value(m1, s).level, 1);  // fine at level 1...
  CHECK_THROWS_AS(best_in_hindsight(s, 2, 1.0), std::invalid_argument);  // ...on-grid at 2

  s.points = {{0.0, 0.7}};
  CHECK_THROWS_AS(best_in_hindsight(s, 3, 1.0), std::invalid_argument);
  s.points = {{0.3, 1.0}};
  CHECK_THROWS_AS(best_in_hindsight(s, 3, 1.0), std::invalid_argument);
  s.points = {{1.2, 0.5}};
  CHECK_THROWS_AS(best_in_hindsight(s, 3, 1.0), std::invalid_argument);
}

TEST_CASE("hindsight guards") {
  CHECK_THROWS_AS(best_in_hindsight(SampleSet{}, -1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(best_in_hindsight(SampleSet{}, 13, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(best_in_hindsight(SampleSet{}, 2, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(best_in_hindsight(SampleSet{}, 2, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(best_in_hindsight(SampleSet{}, 0, 1.0, true), std::invalid_argument);
}

TEST_CASE("monte carlo expectation hits a known integral") {
  const auto corner = GeneralMechanism::staircase(2, {3, 4, 4, 4});
  Rng rng(271828);
  const auto [mean, se] = expected_profit_mc(corner, SmoothDistribution::uniform_square(),
                                             200000, rng);
  CHECK(se > 0.0);
  CHECK(se < 0.001);
  CHECK_EQ(mean, doctest::Approx(0.03125).epsilon(0.05));
  CHECK(std::abs(mean - 0.03125) <= 4.0 * se);
  Rng rng2(1);
  CHECK_THROWS_AS(expected_profit_mc(corner, SmoothDistribution::uniform_square(), 1, rng2),
                  std::invalid_argument);
}

TEST_CASE("frozen theory annotations") {
  CHECK_EQ(theorem_bound(64, 0.25), doctest::Approx(2661.6851733501899).epsilon(1e-15));
  CHECK_EQ(theorem_bound(128, 0.25), doctest::Approx(4391.5564827390917).epsilon(1e-15));
  const auto f = lower_bound_floor(100, 0.02);
  REQUIRE(f.has_value());
  CHECK_EQ(*f, 0.234375);
  CHECK_FALSE(lower_bound_floor(100, 1.0 / 48.0).has_value());
  CHECK_FALSE(lower_bound_floor(100, 0.5).has_value());
}

TEST_CASE("regret report checks traces and subtracts") {
  SampleSet pts;
  pts.points = {{0.2, 0.9}, {0.23, 0.92}};
  const auto bench = best_in_hindsight(pts, 2, 1.0);

  const GridMechanism corner(2, {3, 4, 4, 4});
  const GridMechanism idle = empty_mechanism(2);
  std::vector<RoundTrace> good = {
      {1, corner, pts.points[0], Dyadic{2, 2}, Dyadic{2, 2}},
      {2, corner, pts.points[1], Dyadic{2, 2}, Dyadic{4, 2}},
  };
  std::vector<RoundTrace> zero = {
      {1, idle, pts.points[0], Dyadic{0, 2}, Dyadic{0, 2}},
      {2, idle, pts.points[1], Dyadic{0, 2}, Dyadic{0, 2}},
  };

  const auto report = regret_report({{"good", good}, {"zero", zero}}, bench, 1.0);
  CHECK_EQ(report.rounds, 2);
  CHECK_EQ(report.sigma, 1.0);
  CHECK_EQ(report.benchmark_value, 1.0);
  CHECK_EQ(report.theorem_bound, theorem_bound(2, 1.0));
  CHECK_FALSE(report.lower_bound_floor.has_value());
  REQUIRE_EQ(report.entries.size(), 2);
  CHECK_EQ(report.entries[0].algorithm, "good");
  CHECK_EQ(report.entries[0].final_cumulative, 1.0);
  CHECK_EQ(report.entries[0].regret, 0.0);
  CHECK_EQ(report.entries[1].algorithm, "zero");
  CHECK_EQ(report.entries[1].regret, 1.0);

  CHECK_THROWS_AS(regret_report({}, bench, 1.0), std::invalid_argument);
  auto swapped = zero;
  swapped[1].v = Valuation{0.4, 0.6};
  CHECK_THROWS_AS(regret_report({{"good", good}, {"bad", swapped}}, bench, 1.0),
                  std::invalid_argument);
  auto short_trace = zero;
  short_trace.pop_back();
  CHECK_THROWS_AS(regret_report({{"good", good}, {"short", short_trace}}, bench, 1.0),
                  std::invalid_argument);
  auto misnumbered = zero;
  misnumbered[1].t = 3;
  CHECK_THROWS_AS(regret_report({{"good", good}, {"mis", misnumbered}}, bench, 1.0),
                  std::invalid_argument);
  auto drifted = good;
  drifted[1].cumulative = Dyadic{5, 2};
  CHECK_THROWS_AS(regret_report({{"good", good}, {"drift", drifted}}, bench, 1.0),
                  std::invalid_argument);
}

}  // TEST_SUITE
