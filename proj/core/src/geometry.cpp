#include "hiermech/geometry.hpp"

#include <algorithm>
#include <utility>

namespace hiermech {

namespace {

void check_valuation(const Valuation& v) {
  if (!v.in_unit_square()) {
    throw std::invalid_argument("valuation outside the unit square");
  }
}

}  // namespace

GeneralMechanism::GeneralMechanism(std::vector<RatPoint> vts) : vts_(std::move(vts)) {
  if (vts_.empty()) throw std::invalid_argument("empty boundary polyline");
  // Drop exact consecutive duplicates (transposition can introduce them).
  auto last = std::unique(vts_.begin(), vts_.end(), [](const RatPoint& a, const RatPoint& b) {
    return a.x == b.x && a.y == b.y;
  });
  vts_.erase(last, vts_.end());

  if (vts_.front().x != 0 || vts_.back().x != 1) {
    throw std::invalid_argument("boundary must span x in [0, 1]");
  }
  for (std::size_t i = 0; i < vts_.size(); ++i) {
    const auto& p = vts_[i];
    if (p.x < 0 || p.x > 1 || p.y < 0 || p.y > 1) {
      throw std::invalid_argument("boundary vertex outside the unit square");
    }
    if (i > 0 && (p.x < vts_[i - 1].x || p.y < vts_[i - 1].y)) {
      throw std::invalid_argument("boundary polyline must be nondecreasing");
    }
  }
  dx_.reserve(vts_.size());
  dy_.reserve(vts_.size());
  for (const auto& p : vts_) {
    dx_.push_back(to_double(p.x));
    dy_.push_back(to_double(p.y));
  }
}

GeneralMechanism GeneralMechanism::from_vertices(std::vector<RatPoint> vertices) {
  return GeneralMechanism(std::move(vertices));
}

GeneralMechanism GeneralMechanism::piecewise_linear(std::vector<RatPoint> breakpoints) {
  for (std::size_t i = 1; i < breakpoints.size(); ++i) {
    if (breakpoints[i].x <= breakpoints[i - 1].x) {
      throw std::invalid_argument("piecewise-linear boundary needs strictly increasing x");
    }
  }
  return GeneralMechanism(std::move(breakpoints));
}

GeneralMechanism GeneralMechanism::staircase(int level, const std::vector<std::int32_t>& col_levels) {
  if (level < 0 || level > 30) throw std::invalid_argument("bad staircase level");
  const std::int64_t n = std::int64_t{1} << level;
  if (std::ssize(col_levels) != n) {
    throw std::invalid_argument("staircase needs one column level per column");
  }
  std::vector<RatPoint> pts;
  pts.reserve(2 * col_levels.size() + 2);
  auto frac = [n](std::int64_t a) { return Rat(BigInt(a), BigInt(n)); };
  std::int32_t prev = col_levels[0];
  if (prev < 0 || prev > n) throw std::invalid_argument("column level out of range");
  pts.push_back({Rat(0), frac(prev)});
  for (std::int64_t c = 1; c < n; ++c) {
    const std::int32_t cur = col_levels[static_cast<std::size_t>(c)];
    if (cur < prev || cur > n) throw std::invalid_argument("column levels must be nondecreasing");
    if (cur != prev) {
      pts.push_back({frac(c), frac(prev)});
      pts.push_back({frac(c), frac(cur)});
      prev = cur;
    }
  }
  pts.push_back({Rat(1), frac(prev)});
  return GeneralMechanism(std::move(pts));
}

Rat GeneralMechanism::boundary_at(const Rat& x) const {
  if (x < 0 || x > 1) throw std::invalid_argument("x outside [0, 1]");
  // First vertex with x_j >= x: at a jump this is the bottom of the run.
  auto it = std::lower_bound(vts_.begin(), vts_.end(), x,
                             [](const RatPoint& p, const Rat& v) { return p.x < v; });
  if (it->x == x) return it->y;
  const auto& b = *it;
  const auto& a = *(it - 1);  // a.x < x < b.x, segment is non-vertical
  return a.y + (b.y - a.y) * (x - a.x) / (b.x - a.x);
}

double GeneralMechanism::boundary_value(double x) const {
  auto it = std::lower_bound(dx_.begin(), dx_.end(), x);
  std::size_t j = static_cast<std::size_t>(it - dx_.begin());
  if (j < dx_.size() && dx_[j] == x) return dy_[j];
  return dy_[j - 1] + (dy_[j] - dy_[j - 1]) * (x - dx_[j - 1]) / (dx_[j] - dx_[j - 1]);
}

Rat GeneralMechanism::right_limit_at(const Rat& x) const {
  if (x < 0 || x > 1) throw std::invalid_argument("x outside [0, 1]");
  // Last vertex with x_j <= x: at a jump this is the top of the run.
  auto it = std::upper_bound(vts_.begin(), vts_.end(), x,
                             [](const Rat& v, const RatPoint& p) { return v < p.x; });
  --it;
  if (it->x == x) return it->y;
  const auto& a = *it;
  const auto& b = *(it + 1);
  return a.y + (b.y - a.y) * (x - a.x) / (b.x - a.x);
}

std::optional<Rat> GeneralMechanism::rightmost_at_or_below(const Rat& y) const {
  if (vts_.front().y > y) return std::nullopt;
  // Last vertex with y_k <= y; y coordinates are nondecreasing.
  auto it = std::upper_bound(vts_.begin(), vts_.end(), y,
                             [](const Rat& v, const RatPoint& p) { return v < p.y; });
  --it;
  if (it + 1 == vts_.end()) return Rat(1);
  const auto& a = *it;
  const auto& b = *(it + 1);  // b.y > y >= a.y
  if (b.x == a.x) return a.x;
  return a.x + (b.x - a.x) * (y - a.y) / (b.y - a.y);
}

std::optional<double> GeneralMechanism::rightmost_below(double y) const {
  if (dy_.front() > y) return std::nullopt;
  auto it = std::upper_bound(dy_.begin(), dy_.end(), y);
  std::size_t k = static_cast<std::size_t>(it - dy_.begin()) - 1;
  if (k + 1 == dy_.size()) return 1.0;
  if (dx_[k + 1] == dx_[k]) return dx_[k];
  return dx_[k] + (dx_[k + 1] - dx_[k]) * (y - dy_[k]) / (dy_[k + 1] - dy_[k]);
}

bool GeneralMechanism::is_allocated(const Valuation& v) const {
  check_valuation(v);
  return v.vs == 0.0 || v.vb == 1.0 || v.vb >= boundary_value(v.vs);
}

PaymentPair GeneralMechanism::myerson_payments(const Valuation& v) const {
  check_valuation(v);
  const Rat xs = rat_from_double(v.vs);
  const Rat yb = rat_from_double(v.vb);
  const Rat g = boundary_at(xs);
  const bool alloc = v.vs == 0.0 || v.vb == 1.0 || yb >= g;
  if (!alloc) return {0.0, 0.0, false};
  PaymentPair out;
  out.allocated = true;
  out.q = (v.vs == 0.0) ? 0.0 : to_double(g);
  if (v.vb == 1.0) {
    out.p = 1.0;
  } else {
    auto x = rightmost_at_or_below(yb);
    out.p = x ? to_double(*x) : 0.0;
  }
  return out;
}

double GeneralMechanism::profit(const Valuation& v) const {
  const double g = boundary_value(v.vs);
  const bool alloc = v.vs == 0.0 || v.vb == 1.0 || v.vb >= g;
  if (!alloc) return 0.0;
  const double q = (v.vs == 0.0) ? 0.0 : g;
  double p;
  if (v.vb == 1.0) {
    p = 1.0;
  } else {
    auto x = rightmost_below(v.vb);
    p = x ? *x : 0.0;
  }
  return q - p;
}

GeneralMechanism GeneralMechanism::transposed() const {
  std::vector<RatPoint> out;
  out.reserve(vts_.size() + 2);
  for (auto it = vts_.rbegin(); it != vts_.rend(); ++it) {
    out.push_back({Rat(1) - it->y, Rat(1) - it->x});
  }
  // The reflected graph spans x in [1 - g(1), 1 - g(0)]; pad with the square
  // edges so the result is again a boundary over all of [0, 1].
  if (out.front().x > 0) out.insert(out.begin(), RatPoint{Rat(0), Rat(0)});
  if (out.back().x < 1) out.push_back({Rat(1), Rat(1)});
  return GeneralMechanism(std::move(out));
}

}  // namespace hiermech
