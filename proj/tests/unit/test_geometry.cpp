#include <doctest.h>

#include <optional>
#include <vector>

#include "hiermech/geometry.hpp"
#include "hiermech/gridmech.hpp"
#include "hiermech/rng.hpp"

using namespace hiermech;

namespace {

bool same_vertices(const GeneralMechanism& a, const GeneralMechanism& b) {
  const auto& u = a.vertices();
  const auto& v = b.vertices();
  if (u.size() != v.size()) return false;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i].x != v[i].x || u[i].y != v[i].y) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("diagonal boundary: allocation, payments, profit") {
  const auto m = GeneralMechanism::piecewise_linear({{Rat(0), Rat(0)}, {Rat(1), Rat(1)}});
  CHECK_EQ(m.boundary_at(make_rat(1, 2)), make_rat(1, 2));
  CHECK_EQ(m.boundary_value(0.25), 0.25);
  CHECK(m.is_allocated({0.25, 0.75}));
  CHECK_FALSE(m.is_allocated({0.75, 0.25}));
  const PaymentPair pp = m.myerson_payments({0.25, 0.75});
  CHECK(pp.allocated);
  CHECK_EQ(pp.q, 0.25);  // lowest admitted buyer value in the column
  CHECK_EQ(pp.p, 0.75);  // highest admitted seller value in the row
  CHECK_EQ(m.profit({0.25, 0.75}), -0.5);
  CHECK_EQ(m.profit({0.75, 0.25}), 0.0);
}

TEST_CASE("corner region matches its staircase form") {
  // {x <= 1/4, y >= 3/4} two ways: explicit polyline and level-2 staircase.
  const auto vert = GeneralMechanism::from_vertices(
      {{Rat(0), make_rat(3, 4)}, {make_rat(1, 4), make_rat(3, 4)}, {make_rat(1, 4), Rat(1)},
       {Rat(1), Rat(1)}});
  const auto stair = GeneralMechanism::staircase(2, {3, 4, 4, 4});
  CHECK(same_vertices(vert, stair));
  const PaymentPair pp = stair.myerson_payments({0.2, 0.8});
  CHECK(pp.allocated);
  CHECK_EQ(pp.p, 0.25);
  CHECK_EQ(pp.q, 0.75);
  CHECK_EQ(stair.profit({0.2, 0.8}), 0.5);
  CHECK_FALSE(stair.is_allocated({0.3, 0.8}));
  CHECK_FALSE(stair.is_allocated({0.2, 0.7}));
}

TEST_CASE("mandated segments always allocate") {
  const auto m = GeneralMechanism::staircase(1, {2, 2});  // never trades inside
  CHECK(m.is_allocated({0.0, 0.3}));
  CHECK(m.is_allocated({0.7, 1.0}));
  CHECK(m.is_allocated({0.0, 0.0}));
  CHECK_FALSE(m.is_allocated({0.5, 0.9}));
}

TEST_CASE("staircase jumps are lower semicontinuous") {
  const auto m = GeneralMechanism::staircase(1, {1, 2});
  CHECK_EQ(m.boundary_at(make_rat(1, 2)), make_rat(1, 2));
  CHECK_EQ(m.right_limit_at(make_rat(1, 2)), Rat(1));
  CHECK(m.is_allocated({0.5, 0.5}));  // bottom of the jump stays in the region
}

TEST_CASE("rightmost_at_or_below walks the boundary") {
  const auto diag = GeneralMechanism::piecewise_linear({{Rat(0), Rat(0)}, {Rat(1), Rat(1)}});
  CHECK_EQ(diag.rightmost_at_or_below(make_rat(1, 3)).value(), make_rat(1, 3));
  const auto corner = GeneralMechanism::staircase(2, {3, 4, 4, 4});
  CHECK_FALSE(corner.rightmost_at_or_below(make_rat(1, 2)).has_value());
  CHECK_EQ(corner.rightmost_at_or_below(make_rat(3, 4)).value(), make_rat(1, 4));
  CHECK_EQ(corner.rightmost_at_or_below(Rat(1)).value(), Rat(1));
}

TEST_CASE("transpose reflects across the anti-diagonal") {
  const auto m = GeneralMechanism::staircase(2, {0, 1, 4, 4});
  const auto t = m.transposed();
  const auto expect = GeneralMechanism::staircase(2, {2, 2, 2, 3});
  // One region, two polylines (the reflected top edge arrives as a vertical
  // run at x = 0): compare boundaries and samples, not vertex lists.
  for (int i = 1; i < 64; ++i) {
    CHECK_EQ(t.boundary_at(make_rat(i, 64)), expect.boundary_at(make_rat(i, 64)));
  }
  Rng rng(404);
  for (int i = 0; i < 500; ++i) {
    const Valuation v{rng.uniform01(), rng.uniform01()};
    CHECK_EQ(t.is_allocated(v), expect.is_allocated(v));
    CHECK_EQ(t.profit(v), expect.profit(v));
  }
  // Double reflection restores the original polyline exactly.
  CHECK(same_vertices(t.transposed(), m));
}

TEST_CASE("vertex validation") {
  using V = std::vector<RatPoint>;
  CHECK_THROWS_AS(GeneralMechanism::from_vertices(V{{Rat(0), Rat(0)}}), std::invalid_argument);
  // x must reach 1
  CHECK_THROWS_AS(GeneralMechanism::from_vertices(V{{Rat(0), Rat(0)}, {make_rat(1, 2), Rat(1)}}),
                  std::invalid_argument);
  // y must never decrease
  CHECK_THROWS_AS(GeneralMechanism::from_vertices(
                      V{{Rat(0), make_rat(1, 2)}, {Rat(1), make_rat(1, 4)}}),
                  std::invalid_argument);
  // x must never decrease
  CHECK_THROWS_AS(GeneralMechanism::from_vertices(
                      V{{Rat(0), Rat(0)}, {make_rat(3, 4), Rat(0)}, {make_rat(1, 2), Rat(1)},
                        {Rat(1), Rat(1)}}),
                  std::invalid_argument);
  // piecewise_linear rejects vertical runs
  CHECK_THROWS_AS(GeneralMechanism::piecewise_linear(
                      V{{Rat(0), Rat(0)}, {make_rat(1, 2), Rat(0)}, {make_rat(1, 2), Rat(1)},
                        {Rat(1), Rat(1)}}),
                  std::invalid_argument);
}

TEST_CASE("dyadic arithmetic") {
  Dyadic a{3, 2};
  CHECK_EQ(a.value(), 0.75);
  Dyadic b{-1, 2};
  a += b;
  CHECK_EQ(a, (Dyadic{2, 2}));
  Dyadic wrong{1, 3};
  CHECK_THROWS_AS(a += wrong, std::invalid_argument);
  CHECK_EQ(Dyadic{}.value(), 0.0);
}

}  // TEST_SUITE
