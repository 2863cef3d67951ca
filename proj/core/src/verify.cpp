#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hiermech/harness.hpp"
#include "hiermech/jointads.hpp"

namespace hiermech {

namespace {

struct CheckList {
  nlohmann::json checks = nlohmann::json::array();
  bool all_pass = true;

  void add(const std::string& name, bool pass, std::string detail) {
    all_pass = all_pass && pass;
    checks.push_back({{"name", name}, {"pass", pass}, {"detail", std::move(detail)}});
  }

  nlohmann::json finish(const std::string& suite, std::uint64_t seed) const {
    return nlohmann::json{
        {"suite", suite}, {"seed", seed}, {"pass", all_pass}, {"checks", checks}};
  }
};

Valuation sample_off_grid(Rng& rng, int level) {
  while (true) {
    const Valuation v{rng.uniform01(), rng.uniform01()};
    const double sx = std::ldexp(v.vs, level);
    const double sy = std::ldexp(v.vb, level);
    if (sx != std::floor(sx) && sy != std::floor(sy)) return v;
  }
}

// Nondecreasing piecewise-linear boundary over x = 0, 1/4, ..., 1 with
// y values on the 1/64 grid.
GeneralMechanism random_pl(Rng& rng) {
  std::vector<RatPoint> pts;
  std::int64_t y = static_cast<std::int64_t>(rng.uniform_below(33));
  for (int i = 0; i <= 4; ++i) {
    pts.push_back(RatPoint{make_rat(i, 4), make_rat(std::min<std::int64_t>(y, 64), 64)});
    y += static_cast<std::int64_t>(rng.uniform_below(17));
  }
  return GeneralMechanism::piecewise_linear(std::move(pts));
}

std::vector<std::int32_t> random_col_levels(Rng& rng, int level) {
  const int n = 1 << level;
  std::vector<std::int32_t> ls(static_cast<std::size_t>(n));
  for (auto& l : ls) l = static_cast<std::int32_t>(rng.uniform_below(n + 1));
  std::sort(ls.begin(), ls.end());
  return ls;
}

std::vector<SmoothDistribution> verify_distributions() {
  std::vector<SmoothDistribution> out;
  out.push_back(SmoothDistribution::uniform_square());
  out.push_back(SmoothDistribution::uniform_rect({0.25, 1.0, 0.0, 0.75}));
  out.push_back(SmoothDistribution::rect_mixture({{0.0, 0.5, 0.0, 0.5}, {0.5, 1.0, 0.5, 1.0}},
                                                 {0.5, 0.5}));
  std::vector<double> dens(16, 0.5);
  for (int i = 0; i < 8; ++i) dens[static_cast<std::size_t>(2 * i)] = 1.5;
  out.push_back(SmoothDistribution::piecewise_grid(4, dens));
  return out;
}

nlohmann::json suite_net(std::uint64_t seed) {
  CheckList cl;
  Rng rng(seed);
  const auto dists = verify_distributions();
  const std::int64_t n = 20000;
  int idx = 0;
  for (int level = 2; level <= 4; ++level) {
    for (std::size_t d = 0; d < dists.size(); ++d) {
      for (int rep = 0; rep < 2; ++rep) {
        const GeneralMechanism m =
            rep == 0 ? random_pl(rng)
                     : GeneralMechanism::staircase(2, random_col_levels(rng, 2));
        const double sigma = dists[d].certify_sigma();
        const NetGapEstimate est = net_gap_mc(m, level, dists[d], n, rng);
        const double bound = 6.0 * std::ldexp(1.0, -level) / sigma;
        const double ceiling = bound + 5.0 * est.std_error;
        cl.add(fmt::format("net-{}", idx++), est.mean_abs_gap <= ceiling,
               fmt::format("level={} dist={} sigma={} mean_gap={} bound={} stderr={}", level, d,
                           sigma, est.mean_abs_gap, bound, est.std_error));
      }
    }
  }
  return cl.finish("net", seed);
}

nlohmann::json suite_claim35(std::uint64_t seed) {
  CheckList cl;
  Rng rng(seed);
  const Rat two(2);
  int idx = 0;
  auto check_bounded = [&](const GeneralMechanism& m, int level, const char* tag) {
    const auto [cols, rows] = col_gap_sums(m, level);
    const bool ok = cols <= two && rows <= two && cols >= 0 && rows >= 0;
    cl.add(fmt::format("gap-{}-{}", tag, idx++), ok,
           fmt::format("level={} col_sum={} row_sum={}", level, cols.str(), rows.str()));
  };

  for (int i = 0; i < 12; ++i) {
    const GeneralMechanism m = random_pl(rng);
    const GeneralMechanism mt = m.transposed();
    for (int level = 1; level <= 4; ++level) {
      check_bounded(m, level, "pl");
      check_bounded(mt, level, "plt");
    }
  }

  // A staircase measured at its own level has no gap at all; finer levels
  // stay within the bound.
  for (int i = 0; i < 8; ++i) {
    const int level = 2 + static_cast<int>(rng.uniform_below(2));
    const GeneralMechanism m = GeneralMechanism::staircase(level, random_col_levels(rng, level));
    const auto [cols, rows] = col_gap_sums(m, level);
    cl.add(fmt::format("gap-stair-zero-{}", i), cols == 0 && rows == 0,
           fmt::format("level={} col_sum={} row_sum={}", level, cols.str(), rows.str()));
    check_bounded(m, level + 1, "stair-fine");
  }

  for (int level = 1; level <= 3; ++level) {
    const auto [ec, er] = col_gap_sums(empty_mechanism(2).to_general(), level);
    const auto [ac, ar] = col_gap_sums(always_allocate_mechanism(2).to_general(), level);
    cl.add(fmt::format("gap-extremes-{}", level), ec == 0 && er == 0 && ac == 0 && ar == 0,
           fmt::format("empty=({},{}) full=({},{})", ec.str(), er.str(), ac.str(), ar.str()));
  }
  return cl.finish("claim35", seed);
}

nlohmann::json suite_hedge(std::uint64_t seed) {
  CheckList cl;
  Rng rng(seed);
  for (const int actions : {2, 8, 32}) {
    for (const int rounds : {100, 500}) {
      const double etas[] = {0.05, 0.2, 1.0 / std::sqrt(static_cast<double>(rounds))};
      for (const double eta : etas) {
        HedgeState hedge(actions, eta);
        std::vector<double> totals(static_cast<std::size_t>(actions), 0.0);
        std::vector<double> rewards(static_cast<std::size_t>(actions), 0.0);
        double expected = 0.0;
        double quad = 0.0;
        for (int t = 0; t < rounds; ++t) {
          for (auto& r : rewards) r = 2.0 * rng.uniform01() - 1.0;
          const std::vector<double> probs = hedge.probabilities();
          for (int a = 0; a < actions; ++a) {
            const auto ai = static_cast<std::size_t>(a);
            expected += probs[ai] * rewards[ai];
            quad += probs[ai] * rewards[ai] * rewards[ai];
            totals[ai] += rewards[ai];
          }
          hedge.update(rewards);
        }
        const double best = *std::max_element(totals.begin(), totals.end());
        const double bound =
            std::log(static_cast<double>(actions)) / eta + eta * quad + 1e-9;
        cl.add(fmt::format("hedge-n{}-T{}-eta{}", actions, rounds, eta),
               best - expected <= bound,
               fmt::format("best={} expected={} gap={} bound={}", best, expected,
                           best - expected, bound));
      }
    }
  }
  return cl.finish("hedge", seed);
}

nlohmann::json suite_truthful(std::uint64_t seed) {
  CheckList cl;
  Rng rng(seed);
  const int triples = 2000;
  int seller_viol = 0, buyer_viol = 0, ir_viol = 0, pay_mismatch = 0;
  std::string first_detail = "all clear";

  for (int i = 0; i < triples; ++i) {
    const int level = static_cast<int>(rng.uniform_below(4));
    const GridMechanism gm(level, random_col_levels(rng, level));
    const GeneralMechanism m = gm.to_general();
    const Valuation v = sample_off_grid(rng, std::max(level, 1));

    const bool alloc = m.is_allocated(v);
    const PaymentPair pay = m.myerson_payments(v);
    const PaymentPair gpay = gm.payments(v);
    if (pay.p != gpay.p || pay.q != gpay.q || pay.allocated != gpay.allocated ||
        alloc != pay.allocated) {
      if (++pay_mismatch == 1) {
        first_detail = fmt::format("payment mismatch: mech={} v=({},{})", gm.serialize(), v.vs,
                                   v.vb);
      }
      continue;
    }
    if (alloc && !(pay.p >= v.vs && pay.q <= v.vb && pay.q >= 0.0 && pay.p <= 1.0)) {
      ++ir_viol;
      if (first_detail == "all clear") {
        first_detail =
            fmt::format("IR: mech={} v=({},{}) p={} q={}", gm.serialize(), v.vs, v.vb, pay.p,
                        pay.q);
      }
    }

    const double u_seller = alloc ? pay.p : v.vs;
    const double u_buyer = alloc ? v.vb - pay.q : 0.0;
    const double grid_points[] = {0.0, 0.25, 0.5, 1.0};
    for (int d = 0; d < 8; ++d) {
      const double dev =
          d < 4 ? grid_points[d] : rng.uniform01();
      // Seller misreport: outcome at (dev, vb), utility with true vs.
      {
        const Valuation vd{dev, v.vb};
        const bool a2 = m.is_allocated(vd);
        const PaymentPair p2 = m.myerson_payments(vd);
        const double u2 = a2 ? p2.p : v.vs;
        if (u2 > u_seller) {
          ++seller_viol;
          if (first_detail == "all clear") {
            first_detail = fmt::format("seller: mech={} v=({},{}) dev={} u={} u_dev={}",
                                       gm.serialize(), v.vs, v.vb, dev, u_seller, u2);
          }
        }
      }
      // Buyer misreport: outcome at (vs, dev), utility with true vb.
      {
        const Valuation vd{v.vs, dev};
        const bool a2 = m.is_allocated(vd);
        const PaymentPair p2 = m.myerson_payments(vd);
        const double u2 = a2 ? v.vb - p2.q : 0.0;
        if (u2 > u_buyer) {
          ++buyer_viol;
          if (first_detail == "all clear") {
            first_detail = fmt::format("buyer: mech={} v=({},{}) dev={} u={} u_dev={}",
                                       gm.serialize(), v.vs, v.vb, dev, u_buyer, u2);
          }
        }
      }
    }
  }
  cl.add("payments-agree", pay_mismatch == 0,
         fmt::format("{} mismatches; {}", pay_mismatch, first_detail));
  cl.add("individually-rational", ir_viol == 0, fmt::format("{} violations", ir_viol));
  cl.add("seller-truthful", seller_viol == 0,
         fmt::format("{} violations over {} triples x 8 deviations", seller_viol, triples));
  cl.add("buyer-truthful", buyer_viol == 0,
         fmt::format("{} violations over {} triples x 8 deviations", buyer_viol, triples));
  return cl.finish("truthful", seed);
}

nlohmann::json suite_dp(std::uint64_t seed) {
  CheckList cl;
  Rng rng(seed);
  const std::vector<GridMechanism> all2 = enumerate_grid(2);
  cl.add("family-size-2", all2.size() == 70, fmt::format("|M| = {}", all2.size()));

  int value_mismatch = 0, argmax_mismatch = 0;
  for (int i = 0; i < 50; ++i) {
    SampleSet s;
    const auto count = 1 + rng.uniform_below(40);
    for (std::uint64_t k = 0; k < count; ++k) s.points.push_back(sample_off_grid(rng, 6));

    std::int64_t best_units = std::numeric_limits<std::int64_t>::min();
    const GridMechanism* best = nullptr;
    for (const auto& m : all2) {
      const std::int64_t u = mechanism_value(m, s).num;
      if (u > best_units || (u == best_units && *best < m)) {
        best_units = u;
        best = &m;
      }
    }
    const BenchmarkResult dp = best_in_hindsight(s, 2, 0.5);
    if (dp.total.num != best_units) ++value_mismatch;
    if (dp.best != *best) ++argmax_mismatch;
  }
  cl.add("dp-matches-brute-force-value", value_mismatch == 0,
         fmt::format("{} mismatches over 50 sample sets", value_mismatch));
  cl.add("dp-ties-lexicographic-max", argmax_mismatch == 0,
         fmt::format("{} mismatches over 50 sample sets", argmax_mismatch));

  int edge_mismatch = 0;
  for (int i = 0; i < 30; ++i) {
    const int level = 2 + static_cast<int>(rng.uniform_below(5));
    SampleSet s;
    const auto count = 1 + rng.uniform_below(60);
    for (std::uint64_t k = 0; k < count; ++k) s.points.push_back(sample_off_grid(rng, 6));
    const EdgeWeights w = EdgeWeights::build(s, level);
    const GridMechanism m(level, random_col_levels(rng, level));
    if (w.path_value_units(m) != mechanism_value(m, s).num) ++edge_mismatch;
  }
  cl.add("edge-decomposition", edge_mismatch == 0,
         fmt::format("{} mismatches over 30 mechanisms", edge_mismatch));

  std::vector<GridMechanism> contained;
  for (const auto& m : all2) {
    if (is_quadrant_contained(m)) contained.push_back(m);
  }
  cl.add("quadrant-family-size", contained.size() == 6,
         fmt::format("{} quadrant-contained mechanisms at level 2", contained.size()));
  int clip_mismatch = 0;
  for (int i = 0; i < 25; ++i) {
    SampleSet s;
    const auto count = 1 + rng.uniform_below(40);
    for (std::uint64_t k = 0; k < count; ++k) s.points.push_back(sample_off_grid(rng, 6));
    std::int64_t best_units = std::numeric_limits<std::int64_t>::min();
    const GridMechanism* best = nullptr;
    for (const auto& m : contained) {
      const std::int64_t u = mechanism_value(m, s).num;
      if (u > best_units || (u == best_units && *best < m)) {
        best_units = u;
        best = &m;
      }
    }
    const BenchmarkResult dp = best_in_hindsight(s, 2, 0.5, /*clip_to_quadrant=*/true);
    if (dp.total.num != best_units || dp.best != *best) ++clip_mismatch;
  }
  cl.add("clipped-dp-matches-brute-force", clip_mismatch == 0,
         fmt::format("{} mismatches over 25 sample sets", clip_mismatch));

  const BenchmarkResult empty = best_in_hindsight(SampleSet{}, 2, 0.5);
  cl.add("empty-set-yields-empty-mechanism",
         empty.best == empty_mechanism(2) && empty.total.num == 0,
         fmt::format("best={} units={}", empty.best.serialize(), empty.total.num));
  return cl.finish("dp", seed);
}

nlohmann::json suite_reduction(std::uint64_t seed) {
  CheckList cl;
  Rng rng(seed);

  int roundtrip_bad = 0;
  for (int i = 0; i < 300; ++i) {
    const JointValuation w{rng.uniform01(), rng.uniform01()};
    const Valuation v = f_map(w);
    const JointValuation back = f_inv(v);
    if (back.v1 != w.v1 || back.v2 != w.v2 || !(f_map(back) == v)) ++roundtrip_bad;
  }
  cl.add("f-roundtrip-bit-exact", roundtrip_bad == 0,
         fmt::format("{} mismatches over 300 draws", roundtrip_bad));

  int revenue_bad = 0, price_bad = 0, clip_fixed_bad = 0, idem_bad = 0;
  for (int i = 0; i < 200; ++i) {
    const int level = 1 + static_cast<int>(rng.uniform_below(3));
    const GridMechanism m(level, random_col_levels(rng, level));
    const GridMechanism clip = clip_to_quadrant(m);
    if (clip_to_quadrant(clip) != clip) ++idem_bad;
    const JointAdsMechanism ja(m);
    const JointValuation w{rng.uniform01(), rng.uniform01()};
    const Valuation v = f_map(w);
    const Dyadic rev = ja.revenue_dyadic(w);
    const Dyadic trade = clip.profit_dyadic(v);
    if (rev.num != 2 * trade.num || rev.level != trade.level) ++revenue_bad;
    if (m.profit_dyadic(v).num > trade.num) ++revenue_bad;  // clipping never hurts on Q
    const JointPrices pr = ja.prices(w);
    if (pr.allocated) {
      if (pr.p1 + pr.p2 != ja.revenue(w)) ++price_bad;
    } else if (ja.revenue(w) != 0.0) {
      ++price_bad;
    }
  }
  cl.add("revenue-doubles-clipped-profit", revenue_bad == 0,
         fmt::format("{} mismatches over 200 cases", revenue_bad));
  cl.add("revenue-equals-price-sum", price_bad == 0,
         fmt::format("{} mismatches over 200 cases", price_bad));
  cl.add("clip-idempotent", idem_bad == 0, fmt::format("{} mismatches", idem_bad));

  for (int i = 0; i < 50; ++i) {
    const int level = 1 + static_cast<int>(rng.uniform_below(3));
    const int n = 1 << level;
    const int half = n / 2;
    std::vector<std::int32_t> ls(static_cast<std::size_t>(n), static_cast<std::int32_t>(n));
    std::int32_t cur = static_cast<std::int32_t>(half);
    for (int c = 0; c < half; ++c) {
      cur = std::max(cur, static_cast<std::int32_t>(half + rng.uniform_below(
                                                               static_cast<std::uint64_t>(
                                                                   n - half + 1))));
      ls[static_cast<std::size_t>(c)] = cur;
    }
    const GridMechanism m(level, ls);
    if (!is_quadrant_contained(m) || clip_to_quadrant(m) != m) ++clip_fixed_bad;
  }
  cl.add("clip-fixes-contained-mechanisms", clip_fixed_bad == 0,
         fmt::format("{} mismatches over 50 cases", clip_fixed_bad));

  std::vector<SmoothDistribution> dists = verify_distributions();
  bool push_exact = true;
  std::string push_detail = "all quarters exact";
  for (const auto& d : dists) {
    const double base = d.certify_sigma();
    const double pushed = pushforward_f(d).certify_sigma();
    if (pushed != base / 4.0) {
      push_exact = false;
      push_detail = fmt::format("base={} pushed={} expected={}", base, pushed, base / 4.0);
    }
  }
  cl.add("pushforward-certifies-quarter", push_exact, push_detail);

  bool smoke_ok = true;
  std::string smoke_detail = "60 rounds clean";
  try {
    JointAdsLearner learner(std::make_unique<FlatHedgeLearner>(1, 60, rng.next_u64()));
    const SmoothDistribution ads = SmoothDistribution::uniform_square();
    for (int t = 0; t < 60; ++t) {
      const Valuation raw = ads.sample(rng);
      const JointValuation w{raw.vs, raw.vb};
      const JointAdsMechanism& mech = learner.predict();
      const double rev = mech.revenue(w);
      if (!(rev >= 0.0 && rev <= 2.0)) {
        smoke_ok = false;
        smoke_detail = fmt::format("revenue {} out of range at round {}", rev, t);
        break;
      }
      learner.update(w);
    }
  } catch (const std::exception& e) {
    smoke_ok = false;
    smoke_detail = fmt::format("exception: {}", e.what());
  }
  cl.add("joint-ads-learner-smoke", smoke_ok, smoke_detail);
  return cl.finish("reduction", seed);
}

}  // namespace

std::vector<std::string> verify_suite_names() {
  return {"net", "claim35", "hedge", "truthful", "dp", "reduction"};
}

nlohmann::json run_verify_suite(const std::string& name, std::uint64_t seed) {
  if (name == "net") return suite_net(seed);
  if (name == "claim35") return suite_claim35(seed);
  if (name == "hedge") return suite_hedge(seed);
  if (name == "truthful") return suite_truthful(seed);
  if (name == "dp") return suite_dp(seed);
  if (name == "reduction") return suite_reduction(seed);
  throw std::invalid_argument(fmt::format("unknown verify suite '{}'", name));
}

}  // namespace hiermech
