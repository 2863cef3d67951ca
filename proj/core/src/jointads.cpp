#include "hiermech/jointads.hpp"

#include <stdexcept>

namespace hiermech {

Valuation f_map(const JointValuation& w) {
  if (!w.in_unit_square()) throw std::invalid_argument("joint valuation outside the unit square");
  return {(1.0 - w.v1) / 2.0, (1.0 + w.v2) / 2.0};
}

bool in_quadrant(const Valuation& v) {
  return v.in_unit_square() && v.vs <= 0.5 && v.vb >= 0.5;
}

JointValuation f_inv(const Valuation& v) {
  if (!in_quadrant(v)) {
    throw std::invalid_argument("trade valuation outside the image quadrant");
  }
  return {1.0 - 2.0 * v.vs, 2.0 * v.vb - 1.0};
}

GridMechanism clip_to_quadrant(const GridMechanism& m) {
  if (m.level() < 1) throw std::invalid_argument("quadrant clipping needs level >= 1");
  const std::int32_t n = m.size();
  const std::int32_t half = n / 2;
  std::vector<std::int32_t> levels(static_cast<std::size_t>(n), n);
  for (std::int32_t c = 0; c < half; ++c) {
    levels[static_cast<std::size_t>(c)] =
        std::max(m.col_levels()[static_cast<std::size_t>(c)], half);
  }
  return GridMechanism(m.level(), std::move(levels));
}

bool is_quadrant_contained(const GridMechanism& m) {
  if (m.level() < 1) return false;
  const std::int32_t n = m.size();
  const std::int32_t half = n / 2;
  for (std::int32_t c = 0; c < n; ++c) {
    const std::int32_t lvl = m.col_levels()[static_cast<std::size_t>(c)];
    if (lvl < half || (c >= half && lvl != n)) return false;
  }
  return true;
}

JointAdsMechanism::JointAdsMechanism(const GridMechanism& source)
    : source_(source), clipped_(clip_to_quadrant(source)) {}

bool JointAdsMechanism::is_allocated(const JointValuation& w) const {
  const Valuation v = f_map(w);
  const int c = column_of(v.vs, clipped_.level());
  const int r = row_of(v.vb, clipped_.level());
  return r >= clipped_.col_levels()[static_cast<std::size_t>(c)];
}

JointPrices JointAdsMechanism::prices(const JointValuation& w) const {
  const Valuation v = f_map(w);
  const int level = clipped_.level();
  const int c = column_of(v.vs, level);
  const int r = row_of(v.vb, level);
  const std::int32_t q_units = clipped_.col_levels()[static_cast<std::size_t>(c)];
  if (r < q_units) return {0.0, 0.0, false};
  const std::int32_t p_units = clipped_.row_cross()[static_cast<std::size_t>(r)];
  JointPrices out;
  out.allocated = true;
  // Clipping keeps p <= 1/2 <= q, so both posted prices land in [0, 1].
  out.p1 = 1.0 - 2.0 * std::ldexp(static_cast<double>(p_units), -level);
  out.p2 = 2.0 * std::ldexp(static_cast<double>(q_units), -level) - 1.0;
  return out;
}

Dyadic JointAdsMechanism::revenue_dyadic(const JointValuation& w) const {
  const Valuation v = f_map(w);
  const int level = clipped_.level();
  const int c = column_of(v.vs, level);
  const int r = row_of(v.vb, level);
  return Dyadic{2 * static_cast<std::int64_t>(clipped_.profit_units(c, r)), level};
}

double JointAdsMechanism::revenue(const JointValuation& w) const {
  return revenue_dyadic(w).value();
}

JointAdsLearner::JointAdsLearner(std::unique_ptr<Learner> inner) : inner_(std::move(inner)) {
  if (!inner_) throw std::invalid_argument("joint-ads wrapper needs a learner");
  if (inner_->mechanism_level() < 1) {
    throw std::invalid_argument("joint-ads reduction needs mechanisms of level >= 1");
  }
}

const JointAdsMechanism& JointAdsLearner::predict() {
  current_ = std::make_unique<JointAdsMechanism>(inner_->predict());
  return *current_;
}

void JointAdsLearner::update(const JointValuation& w) {
  if (!current_) throw std::logic_error("update() before predict()");
  inner_->update(f_map(w));
  current_.reset();
}

SmoothDistribution pushforward_f(const SmoothDistribution& d) {
  using Rect = SmoothDistribution::Rect;
  auto push = [](const Rect& r) {
    return Rect{(1.0 - r.x1) / 2.0, (1.0 - r.x0) / 2.0, (1.0 + r.y0) / 2.0, (1.0 + r.y1) / 2.0};
  };
  switch (d.kind()) {
    case SmoothDistribution::Kind::UniformSquare:
      return SmoothDistribution::uniform_rect({0.0, 0.5, 0.5, 1.0});
    case SmoothDistribution::Kind::UniformRect:
      return SmoothDistribution::uniform_rect(push(d.rects().front()));
    case SmoothDistribution::Kind::RectMixture: {
      std::vector<Rect> rects;
      rects.reserve(d.rects().size());
      for (const Rect& r : d.rects()) rects.push_back(push(r));
      return SmoothDistribution::rect_mixture(std::move(rects), d.weights());
    }
    case SmoothDistribution::Kind::PiecewiseGrid: {
      const int m = d.resolution();
      const double cell_mass = 1.0 / (static_cast<double>(m) * m);
      std::vector<Rect> rects;
      std::vector<double> weights;
      for (int iy = 0; iy < m; ++iy) {
        for (int ix = 0; ix < m; ++ix) {
          const double density = d.densities()[static_cast<std::size_t>(iy) * m + ix];
          if (density == 0.0) continue;
          const Rect cell{static_cast<double>(ix) / m, static_cast<double>(ix + 1) / m,
                          static_cast<double>(iy) / m, static_cast<double>(iy + 1) / m};
          rects.push_back(push(cell));
          weights.push_back(density * cell_mass);
        }
      }
      return SmoothDistribution::rect_mixture(std::move(rects), std::move(weights));
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace hiermech
