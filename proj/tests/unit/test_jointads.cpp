#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <memory>
#include <vector>

#include "hiermech/jointads.hpp"
#include "hiermech/rng.hpp"

using namespace hiermech;

namespace {

JointValuation draw_ads(Rng& rng) { return {rng.uniform01(), rng.uniform01()}; }

// Exact Q points: halving and 1+u keep every bit.
Valuation draw_quadrant(Rng& rng) {
  return {rng.uniform01() / 2.0, (1.0 + rng.uniform01()) / 2.0};
}

GridMechanism random_mech(Rng& rng, int level) {
  const auto n = std::size_t{1} << level;
  std::vector<std::int32_t> ls(n);
  for (auto& v : ls) v = static_cast<std::int32_t>(rng.uniform_below(n + 1));
  std::sort(ls.begin(), ls.end());
  return GridMechanism(level, std::move(ls));
}

}  // namespace

TEST_SUITE("jointads") {

TEST_CASE("the change of variables is an exact bijection onto the quadrant") {
  CHECK_EQ(f_map({0.0, 0.0}), (Valuation{0.5, 0.5}));
  CHECK_EQ(f_map({1.0, 1.0}), (Valuation{0.0, 1.0}));
  CHECK_EQ(f_map({1.0, 0.0}), (Valuation{0.0, 0.5}));
  CHECK_EQ(f_map({0.0, 1.0}), (Valuation{0.5, 1.0}));
  CHECK_EQ(f_map({0.6, 0.6}), (Valuation{0.2, 0.8}));

  Rng rng(606);
  for (int i = 0; i < 300; ++i) {
    const JointValuation w = draw_ads(rng);
    const Valuation v = f_map(w);
    CHECK(in_quadrant(v));
    const JointValuation back = f_inv(v);
    CHECK_EQ(back.v1, w.v1);
    CHECK_EQ(back.v2, w.v2);
  }
  for (int i = 0; i < 300; ++i) {
    const Valuation v = draw_quadrant(rng);
    CHECK_EQ(f_map(f_inv(v)), v);
  }

  CHECK(in_quadrant({0.5, 0.5}));
  CHECK(in_quadrant({0.0, 1.0}));
  CHECK_FALSE(in_quadrant({0.500001, 0.7}));
  CHECK_FALSE(in_quadrant({0.2, 0.49}));
  CHECK_THROWS_AS(f_inv({0.6, 0.7}), std::invalid_argument);
  CHECK_THROWS_AS(f_inv({0.3, 0.4}), std::invalid_argument);
  CHECK_THROWS_AS(f_map({1.2, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(f_map({0.5, -0.1}), std::invalid_argument);
}

TEST_CASE("clipping closes everything outside the quadrant") {
  CHECK_EQ(clip_to_quadrant(GridMechanism(2, {0, 1, 2, 4})), GridMechanism(2, {2, 2, 4, 4}));
  CHECK_EQ(clip_to_quadrant(GridMechanism(2, {3, 4, 4, 4})), GridMechanism(2, {3, 4, 4, 4}));
  CHECK_EQ(clip_to_quadrant(always_allocate_mechanism(1)), GridMechanism(1, {1, 2}));
  CHECK(is_quadrant_contained(GridMechanism(2, {2, 2, 4, 4})));
  CHECK_FALSE(is_quadrant_contained(GridMechanism(2, {1, 2, 4, 4})));
  CHECK_FALSE(is_quadrant_contained(GridMechanism(2, {2, 2, 3, 4})));
  CHECK_FALSE(is_quadrant_contained(empty_mechanism(0)));
  CHECK_THROWS_AS(clip_to_quadrant(empty_mechanism(0)), std::invalid_argument);

  Rng rng(607);
  for (int i = 0; i < 60; ++i) {
    const int level = 1 + static_cast<int>(rng.uniform_below(3));
    const GridMechanism m = random_mech(rng, level);
    const GridMechanism c = clip_to_quadrant(m);
    CHECK(is_quadrant_contained(c));
    CHECK_EQ(clip_to_quadrant(c), c);
    if (is_quadrant_contained(m)) CHECK_EQ(c, m);
    for (int k = 0; k < 40; ++k) {
      const Valuation v{rng.uniform01(), rng.uniform01()};
      const bool inside = v.vs < 0.5 && v.vb > 0.5;
      CHECK_EQ(c.is_allocated(v), m.is_allocated(v) && inside);
    }
  }
}

TEST_CASE("posted prices follow the clipped thresholds") {
  const JointAdsMechanism corner(GridMechanism(2, {3, 4, 4, 4}));
  const JointValuation w{0.6, 0.6};
  REQUIRE(corner.is_allocated(w));
  const JointPrices pr = corner.prices(w);
  CHECK(pr.allocated);
  CHECK_EQ(pr.p1, 0.5);
  CHECK_EQ(pr.p2, 0.5);
  CHECK_EQ(corner.revenue(w), 1.0);
  CHECK_EQ(corner.revenue_dyadic(w), (Dyadic{4, 2}));

  const JointValuation lost{0.1, 0.1};  // maps to (0.45, 0.55), outside the corner
  CHECK_FALSE(corner.is_allocated(lost));
  const JointPrices none = corner.prices(lost);
  CHECK_FALSE(none.allocated);
  CHECK_EQ(none.p1, 0.0);
  CHECK_EQ(none.p2, 0.0);
  CHECK_EQ(corner.revenue(lost), 0.0);
}

TEST_CASE("revenue is twice the clipped trade profit and never negative") {
  Rng rng(608);
  for (int i = 0; i < 80; ++i) {
    const int level = 1 + static_cast<int>(rng.uniform_below(3));
    const JointAdsMechanism jm(random_mech(rng, level));
    CHECK_EQ(jm.clipped(), clip_to_quadrant(jm.source()));
    for (int k = 0; k < 60; ++k) {
      const JointValuation w = draw_ads(rng);
      const Valuation v = f_map(w);
      const Dyadic rev = jm.revenue_dyadic(w);
      CHECK_EQ(rev.num, 2 * jm.clipped().profit_dyadic(v).num);
      CHECK(rev.num >= 0);
      const JointPrices pr = jm.prices(w);
      CHECK_EQ(pr.allocated, jm.is_allocated(w));
      if (pr.allocated) {
        CHECK(pr.p1 >= 0.0);
        CHECK(pr.p1 <= 1.0);
        CHECK(pr.p2 >= 0.0);
        CHECK(pr.p2 <= 1.0);
        CHECK_EQ(pr.p1 + pr.p2, jm.revenue(w));
      } else {
        CHECK_EQ(rev.num, 0);
      }
      // On the image quadrant, clipping never costs trade profit, which is
      // what makes half the revenue dominate the source mechanism's profit.
      CHECK(jm.source().profit_dyadic(v).num <= jm.clipped().profit_dyadic(v).num);
    }
  }
}

TEST_CASE("wrapper drives the inner learner through the change of variables") {
  JointAdsLearner wrapped(std::make_unique<FlatHedgeLearner>(1, 16, 77));
  FlatHedgeLearner twin(1, 16, 77);
  CHECK_EQ(wrapped.name(), "flat-hedge");
  CHECK_EQ(wrapped.mechanism_level(), 1);
  Rng rng(909);
  for (int t = 0; t < 16; ++t) {
    const JointAdsMechanism& jm = wrapped.predict();
    const GridMechanism& twin_m = twin.predict();
    CHECK_EQ(jm.source(), twin_m);
    CHECK_EQ(jm.clipped(), clip_to_quadrant(twin_m));
    const JointValuation w = draw_ads(rng);
    wrapped.update(w);
    twin.update(f_map(w));
    const auto& inner = dynamic_cast<const FlatHedgeLearner&>(wrapped.inner());
    CHECK_EQ(inner.hedge().log_weights(), twin.hedge().log_weights());
  }
  CHECK_THROWS_AS(wrapped.update({0.5, 0.5}), std::logic_error);
  CHECK_THROWS_AS(JointAdsLearner(nullptr), std::invalid_argument);
  CHECK_THROWS_AS(JointAdsLearner(std::make_unique<HierMechLearner>(1, 0, 1)),
                  std::invalid_argument);
}

TEST_CASE("pushforward lands in the quadrant with four times the density") {
  const auto square = pushforward_f(SmoothDistribution::uniform_square());
  CHECK_EQ(square.kind(), SmoothDistribution::Kind::UniformRect);
  CHECK_EQ(square.certify_sigma(), 0.25);

  const auto rect = SmoothDistribution::uniform_rect({0.25, 0.75, 0.25, 0.5});
  const auto prect = pushforward_f(rect);
  REQUIRE_EQ(prect.kind(), SmoothDistribution::Kind::UniformRect);
  const auto& r = prect.rects().front();
  CHECK_EQ(r.x0, 0.125);
  CHECK_EQ(r.x1, 0.375);
  CHECK_EQ(r.y0, 0.625);
  CHECK_EQ(r.y1, 0.75);
  CHECK_EQ(prect.certify_sigma(), rect.certify_sigma() / 4.0);

  std::vector<double> d(16, 0.0);
  d[0] = d[5] = 4.0;
  for (std::size_t i : {std::size_t{2}, std::size_t{3}, std::size_t{6}, std::size_t{7},
                        std::size_t{8}, std::size_t{11}, std::size_t{12}, std::size_t{15}}) {
    d[i] = 1.0;
  }
  const auto grid = SmoothDistribution::piecewise_grid(4, d);
  const auto pgrid = pushforward_f(grid);
  REQUIRE_EQ(pgrid.kind(), SmoothDistribution::Kind::RectMixture);
  CHECK_EQ(pgrid.rects().size(), 10);  // zero-density cells are dropped
  CHECK_EQ(pgrid.certify_sigma(), grid.certify_sigma() / 4.0);

  Rng rng(610);
  for (const auto* dist : {&square, &prect, &pgrid}) {
    for (int i = 0; i < 1500; ++i) {
      const Valuation v = dist->sample(rng);
      CHECK(in_quadrant(v));
    }
  }
  // Densities transport pointwise: 4x at the image of each interior point.
  for (int i = 0; i < 400; ++i) {
    const JointValuation w = draw_ads(rng);
    const Valuation v = f_map(w);
    CHECK_EQ(pgrid.density_at(v.vs, v.vb), 4.0 * grid.density_at(w.v1, w.v2));
    CHECK_EQ(prect.density_at(v.vs, v.vb), 4.0 * rect.density_at(w.v1, w.v2));
  }
  // The quarter scaling is exact for every sequence family, which is what
  // lets a wrapped run certify sigma' / 4 for its inner stream.
  for (const char* kind : {"stationary", "drifting-rectangle", "switching-mixture"}) {
    const auto seq = make_sequence(kind, 12, 0.3, 4);
    for (const auto& round : seq.rounds) {
      CHECK_EQ(pushforward_f(round).certify_sigma(), round.certify_sigma() / 4.0);
    }
  }
}

}  // TEST_SUITE
