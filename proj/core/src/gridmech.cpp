#include "hiermech/gridmech.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include "hiermech/adversary.hpp"

namespace hiermech {

namespace {

constexpr int kMaxLevel = 24;

void check_level(int level) {
  if (level < 0 || level > kMaxLevel) {
    throw std::invalid_argument(fmt::format("grid level {} outside [0, {}]", level, kMaxLevel));
  }
}

void check_valuation(const Valuation& v) {
  if (!v.in_unit_square()) {
    throw std::invalid_argument("valuation outside the unit square");
  }
}

std::int32_t parse_i32(std::string_view s) {
  std::int32_t out = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::invalid_argument(fmt::format("bad integer '{}' in mechanism text", s));
  }
  return out;
}

}  // namespace

int column_of(double vs, int level) {
  const double scaled = std::ldexp(vs, level);  // power-of-two scaling is exact
  auto c = static_cast<std::int64_t>(scaled);
  if (static_cast<double>(c) == scaled && c > 0) --c;  // grid line: left column
  const std::int64_t n = std::int64_t{1} << level;
  return static_cast<int>(std::min(c, n - 1));
}

int row_of(double vb, int level) {
  const double scaled = std::ldexp(vb, level);
  auto r = static_cast<std::int64_t>(scaled);
  const std::int64_t n = std::int64_t{1} << level;
  return static_cast<int>(std::min(r, n - 1));
}

GridMechanism::GridMechanism(int level, std::vector<std::int32_t> col_levels)
    : level_(level), col_levels_(std::move(col_levels)) {
  check_level(level);
  const std::int32_t n = size();
  if (std::ssize(col_levels_) != n) {
    throw std::invalid_argument("col_levels must have one entry per grid column");
  }
  std::int32_t prev = 0;
  for (std::int32_t lvl : col_levels_) {
    if (lvl < prev || lvl > n) {
      throw std::invalid_argument("col_levels must be nondecreasing in [0, 2^level]");
    }
    prev = lvl;
  }
  row_cross_.resize(static_cast<std::size_t>(n));
  std::int32_t c = 0;
  for (std::int32_t r = 0; r < n; ++r) {
    while (c < n && col_levels_[static_cast<std::size_t>(c)] <= r) ++c;
    row_cross_[static_cast<std::size_t>(r)] = c;
  }
}

bool GridMechanism::is_empty_mechanism() const {
  return col_levels_.front() == size();
}

bool GridMechanism::is_always_allocate() const {
  return col_levels_.back() == 0;
}

bool GridMechanism::is_allocated(const Valuation& v) const {
  check_valuation(v);
  if (v.vs == 0.0 || v.vb == 1.0) return true;
  const int c = column_of(v.vs, level_);
  return row_of(v.vb, level_) >= col_levels_[static_cast<std::size_t>(c)];
}

Dyadic GridMechanism::profit_dyadic(const Valuation& v) const {
  check_valuation(v);
  const int c = column_of(v.vs, level_);
  const int r = row_of(v.vb, level_);
  return Dyadic{profit_units(c, r), level_};
}

double GridMechanism::profit(const Valuation& v) const {
  return profit_dyadic(v).value();
}

PaymentPair GridMechanism::payments(const Valuation& v) const {
  check_valuation(v);
  const int c = column_of(v.vs, level_);
  const int r = row_of(v.vb, level_);
  const bool alloc =
      v.vs == 0.0 || v.vb == 1.0 || r >= col_levels_[static_cast<std::size_t>(c)];
  if (!alloc) return {0.0, 0.0, false};
  PaymentPair out;
  out.allocated = true;
  out.q = v.vs == 0.0
              ? 0.0
              : std::ldexp(static_cast<double>(col_levels_[static_cast<std::size_t>(c)]), -level_);
  out.p = v.vb == 1.0
              ? 1.0
              : std::ldexp(static_cast<double>(row_cross_[static_cast<std::size_t>(r)]), -level_);
  return out;
}

GeneralMechanism GridMechanism::to_general() const {
  return GeneralMechanism::staircase(level_, col_levels_);
}

std::string GridMechanism::serialize() const {
  return fmt::format("{}:{}", level_, fmt::join(col_levels_, ","));
}

GridMechanism GridMechanism::parse(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw std::invalid_argument("mechanism text must look like 'level:c0,c1,...'");
  }
  const int level = parse_i32(text.substr(0, colon));
  check_level(level);
  std::vector<std::int32_t> levels;
  levels.reserve(std::size_t{1} << level);
  std::string_view rest = text.substr(colon + 1);
  while (true) {
    const auto comma = rest.find(',');
    levels.push_back(parse_i32(rest.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return GridMechanism(level, std::move(levels));
}

bool operator==(const GridMechanism& a, const GridMechanism& b) {
  return a.level() == b.level() && a.col_levels() == b.col_levels();
}

bool operator!=(const GridMechanism& a, const GridMechanism& b) { return !(a == b); }

bool operator<(const GridMechanism& a, const GridMechanism& b) {
  if (a.level() != b.level()) return a.level() < b.level();
  return a.col_levels() < b.col_levels();
}

GridMechanism empty_mechanism(int level) {
  check_level(level);
  const auto n = std::int32_t{1} << level;
  return GridMechanism(level, std::vector<std::int32_t>(static_cast<std::size_t>(n), n));
}

GridMechanism always_allocate_mechanism(int level) {
  check_level(level);
  const auto n = std::size_t{1} << level;
  return GridMechanism(level, std::vector<std::int32_t>(n, 0));
}

std::uint64_t grid_family_size(int level) {
  check_level(level);
  if (level > 5) {
    throw std::invalid_argument("grid family size exceeds 64 bits above level 5");
  }
  const std::int64_t n = std::int64_t{1} << level;
  BigInt c = 1;
  for (std::int64_t i = 1; i <= n; ++i) {
    c = c * (n + i) / i;  // exact: partial binomials divide evenly
  }
  return c.convert_to<std::uint64_t>();
}

void for_each_grid(int level, const std::function<void(const GridMechanism&)>& fn,
                   bool force_large) {
  check_level(level);
  if (level > 4) {
    throw std::invalid_argument("grid enumeration is not tractable above level 4");
  }
  if (level > 3 && !force_large) {
    throw std::invalid_argument(
        "enumerating level 4 walks ~6e8 mechanisms; pass force_large to confirm");
  }
  const auto n = std::int32_t{1} << level;
  std::vector<std::int32_t> levels(static_cast<std::size_t>(n), 0);
  while (true) {
    fn(GridMechanism(level, levels));
    // Lexicographic successor among nondecreasing sequences bounded by n.
    std::int64_t i = n - 1;
    while (i >= 0 && levels[static_cast<std::size_t>(i)] == n) --i;
    if (i < 0) break;
    const std::int32_t next = levels[static_cast<std::size_t>(i)] + 1;
    for (std::int64_t j = i; j < n; ++j) levels[static_cast<std::size_t>(j)] = next;
  }
}

std::vector<GridMechanism> enumerate_grid(int level, bool force_large) {
  check_level(level);
  if (level > 3) {
    throw std::invalid_argument(
        "materializing above level 3 is refused; stream with for_each_grid instead");
  }
  (void)force_large;
  std::vector<GridMechanism> out;
  out.reserve(grid_family_size(level));
  for_each_grid(level, [&](const GridMechanism& m) { out.push_back(m); });
  return out;
}

GridMechanism approximate(const GeneralMechanism& m, int level) {
  check_level(level);
  const std::int64_t n = std::int64_t{1} << level;
  std::vector<std::int32_t> levels;
  levels.reserve(static_cast<std::size_t>(n));
  for (std::int64_t c = 0; c < n; ++c) {
    // sup of g over the half-open column equals the boundary value at its
    // right edge; a cell row is kept only if it clears that sup.
    const Rat sup = m.boundary_at(Rat(BigInt(c + 1), BigInt(n)));
    levels.push_back(static_cast<std::int32_t>(to_int64(ceil_rat(sup * n))));
  }
  return GridMechanism(level, std::move(levels));
}

GridMechanism approximate(const GridMechanism& m, int level) {
  check_level(level);
  if (level > m.level()) {
    throw std::invalid_argument("approximation level must not exceed the source level");
  }
  const int shift = m.level() - level;
  const std::int32_t n = std::int32_t{1} << level;
  const std::int32_t factor = std::int32_t{1} << shift;
  std::vector<std::int32_t> levels;
  levels.reserve(static_cast<std::size_t>(n));
  for (std::int32_t c = 0; c < n; ++c) {
    // Last fine column of the block carries the block max (levels are
    // nondecreasing); round its height up to whole coarse cells.
    const std::int32_t fine = m.col_levels()[static_cast<std::size_t>((c + 1) * factor - 1)];
    levels.push_back((fine + factor - 1) / factor);
  }
  return GridMechanism(level, std::move(levels));
}

std::pair<Rat, Rat> col_gap_sums(const GeneralMechanism& m, int level) {
  check_level(level);
  const std::int64_t n = std::int64_t{1} << level;
  auto one_orientation = [&](const GeneralMechanism& g) {
    const GridMechanism phi = approximate(g, level);
    Rat total(0);
    for (std::int64_t c = 0; c < n; ++c) {
      // Lowest point of the region over the open column is the right limit at
      // the column's left edge; the approximation floor sits at its level.
      const Rat region_floor = g.right_limit_at(Rat(BigInt(c), BigInt(n)));
      total += Rat(BigInt(phi.col_levels()[static_cast<std::size_t>(c)]), BigInt(n)) - region_floor;
    }
    return total;
  };
  return {one_orientation(m), one_orientation(m.transposed())};
}

NetGapEstimate net_gap_mc(const GeneralMechanism& m, int level, const SmoothDistribution& dist,
                          std::int64_t samples, Rng& rng) {
  if (samples < 2) throw std::invalid_argument("need at least 2 samples");
  const GridMechanism phi = approximate(m, level);
  double sum = 0.0, sumsq = 0.0;
  for (std::int64_t i = 0; i < samples; ++i) {
    const Valuation v = dist.sample(rng);
    const double d = std::abs(m.profit(v) - phi.profit(v));
    sum += d;
    sumsq += d * d;
  }
  NetGapEstimate est;
  est.samples = samples;
  est.mean_abs_gap = sum / static_cast<double>(samples);
  const double var =
      std::max(0.0, (sumsq - sum * est.mean_abs_gap) / static_cast<double>(samples - 1));
  est.std_error = std::sqrt(var / static_cast<double>(samples));
  return est;
}

}  // namespace hiermech
