#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hiermech/geometry.hpp"
#include "hiermech/rng.hpp"

namespace hiermech {

class SmoothDistribution;

// Column index of a seller value on the 2^-level grid. Values exactly on an
// interior grid line belong to the lower (left) column; 0 maps to column 0.
int column_of(double vs, int level);

// Row index of a buyer value: floor(vb * 2^level), with 1.0 clamped into the
// top row. Values on a grid line take the upper row, so closed-region
// boundaries allocate.
int row_of(double vb, int level);

// Mechanism whose allocation region is a union of cells of the 2^-level grid,
// described by col_levels[c] = number of excluded cells at the bottom of
// column c (nondecreasing, in [0, 2^level]). col_levels all equal to 2^level
// is the empty (never-trade) mechanism; all zero is always-allocate.
class GridMechanism {
 public:
  GridMechanism() : GridMechanism(0, {1}) {}  // level-0 empty mechanism

  GridMechanism(int level, std::vector<std::int32_t> col_levels);

  int level() const { return level_; }
  std::int32_t size() const { return std::int32_t{1} << level_; }
  const std::vector<std::int32_t>& col_levels() const { return col_levels_; }
  // row_cross[r]: first column whose levels exceed r, i.e. the number of grid
  // columns allocated in row r; equals the seller threshold in grid units.
  const std::vector<std::int32_t>& row_cross() const { return row_cross_; }

  bool is_empty_mechanism() const;
  bool is_always_allocate() const;

  bool is_allocated(const Valuation& v) const;

  // Per-trade profit in grid units of 2^-level, for precomputed cell indices:
  // col_levels[c] - row_cross[r] when row r clears column c's level, else 0.
  std::int32_t profit_units(int c, int r) const {
    const std::int32_t lvl = col_levels_[static_cast<std::size_t>(c)];
    return r >= lvl ? lvl - row_cross_[static_cast<std::size_t>(r)] : 0;
  }

  Dyadic profit_dyadic(const Valuation& v) const;
  double profit(const Valuation& v) const;

  // Threshold payments, consistent with the general-region evaluation
  // everywhere in the open square (the mandated edges vs=0 / vb=1 follow the
  // region reading, profit() the grid formula; they differ only there).
  PaymentPair payments(const Valuation& v) const;

  GeneralMechanism to_general() const;

  // "level:c0,c1,..." with col_levels comma-separated.
  std::string serialize() const;
  static GridMechanism parse(std::string_view text);

 private:
  int level_ = 0;
  std::vector<std::int32_t> col_levels_;
  std::vector<std::int32_t> row_cross_;
};

bool operator==(const GridMechanism& a, const GridMechanism& b);
bool operator!=(const GridMechanism& a, const GridMechanism& b);
// Orders by level, then lexicographically by col_levels.
bool operator<(const GridMechanism& a, const GridMechanism& b);

GridMechanism empty_mechanism(int level);
GridMechanism always_allocate_mechanism(int level);

// |M_eps| = C(2^(level+1), 2^level), exact. Throws for level > 5 (the count
// no longer fits 64 bits).
std::uint64_t grid_family_size(int level);

// All grid mechanisms at this level in lexicographic col_levels order.
// Materializing is refused above level 3; level 4 is reachable only through
// for_each_grid with force_large.
std::vector<GridMechanism> enumerate_grid(int level, bool force_large = false);
void for_each_grid(int level, const std::function<void(const GridMechanism&)>& fn,
                   bool force_large = false);

// Inner grid approximation: the union of all grid cells fully contained in
// the allocation region. Column levels are ceil(sup_column g / eps).
GridMechanism approximate(const GeneralMechanism& m, int level);
// Same map for an already-gridded mechanism at a coarser level; exact integer
// arithmetic.
GridMechanism approximate(const GridMechanism& m, int level);

// Per-column and per-row gap sums between the region and its inner
// approximation: pair(sum over columns, sum over rows), exact.
std::pair<Rat, Rat> col_gap_sums(const GeneralMechanism& m, int level);

struct NetGapEstimate {
  double mean_abs_gap = 0.0;
  double std_error = 0.0;
  std::int64_t samples = 0;
};

// Monte Carlo estimate of E|profit(M, v) - profit(approx(M), v)| under the
// given valuation distribution.
NetGapEstimate net_gap_mc(const GeneralMechanism& m, int level, const SmoothDistribution& dist,
                          std::int64_t samples, Rng& rng);

}  // namespace hiermech
