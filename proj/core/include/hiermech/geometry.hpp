#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "hiermech/rational.hpp"

namespace hiermech {

// A seller/buyer valuation pair in the unit square.
struct Valuation {
  double vs = 0.0;
  double vb = 0.0;

  bool in_unit_square() const {
    return vs >= 0.0 && vs <= 1.0 && vb >= 0.0 && vb <= 1.0;
  }
};

inline bool operator==(const Valuation& a, const Valuation& b) {
  return a.vs == b.vs && a.vb == b.vb;
}

// Exact dyadic value num * 2^-level. |num| stays well below 2^53 everywhere in
// this library, so value() is exact.
struct Dyadic {
  std::int64_t num = 0;
  int level = 0;

  double value() const { return std::ldexp(static_cast<double>(num), -level); }

  Dyadic& operator+=(const Dyadic& o) {
    if (o.level != level) throw std::invalid_argument("Dyadic level mismatch");
    num += o.num;
    return *this;
  }
};

inline bool operator==(const Dyadic& a, const Dyadic& b) {
  return a.num == b.num && a.level == b.level;
}

struct PaymentPair {
  double p = 0.0;  // paid to the seller
  double q = 0.0;  // charged to the buyer
  bool allocated = false;
};

struct RatPoint {
  Rat x;
  Rat y;
};

// Mechanism given by a monotone allocation region in the unit square.
//
// The region is {(x, y) : y >= g(x)} plus the two mandated segments
// {0} x [0,1] and [0,1] x {1}. The boundary g is stored as a nondecreasing
// polyline from x=0 to x=1; vertical runs encode jump discontinuities and the
// function value at a jump is the bottom of the run (lower semicontinuous),
// which keeps the region closed.
class GeneralMechanism {
 public:
  // Continuous piecewise-linear boundary: strictly increasing x coordinates.
  static GeneralMechanism piecewise_linear(std::vector<RatPoint> breakpoints);

  // Staircase boundary of a 2^-level grid mechanism with the given column
  // levels (number of cells below the region in each column).
  static GeneralMechanism staircase(int level, const std::vector<std::int32_t>& col_levels);

  // Raw polyline; vertical runs allowed. Validates monotonicity and span.
  static GeneralMechanism from_vertices(std::vector<RatPoint> vertices);

  // Lower-semicontinuous boundary value at x.
  Rat boundary_at(const Rat& x) const;
  double boundary_value(double x) const;

  // Limit of g from the right (top of the jump at x, if any).
  Rat right_limit_at(const Rat& x) const;

  // Largest x with g(x) <= y, or nothing when g > y everywhere.
  std::optional<Rat> rightmost_at_or_below(const Rat& y) const;
  std::optional<double> rightmost_below(double y) const;

  bool is_allocated(const Valuation& v) const;

  // Threshold payments: q is the lowest admitted buyer value at v.vs, p the
  // highest admitted seller value at v.vb; (0, 0) when not allocated.
  PaymentPair myerson_payments(const Valuation& v) const;

  // q - p when allocated, else 0.
  double profit(const Valuation& v) const;

  // Reflection across the anti-diagonal: (x, y) -> (1-y, 1-x). Swaps the roles
  // of columns and rows while preserving monotonicity.
  GeneralMechanism transposed() const;

  const std::vector<RatPoint>& vertices() const { return vts_; }

 private:
  explicit GeneralMechanism(std::vector<RatPoint> vts);

  std::vector<RatPoint> vts_;
  // Cached double copies for the sampling-speed paths.
  std::vector<double> dx_, dy_;
};

}  // namespace hiermech
