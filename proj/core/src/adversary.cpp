#include "hiermech/adversary.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace hiermech {

namespace {

void check_rect(const SmoothDistribution::Rect& r) {
  if (!(r.x0 >= 0.0 && r.x0 < r.x1 && r.x1 <= 1.0 && r.y0 >= 0.0 && r.y0 < r.y1 && r.y1 <= 1.0)) {
    throw std::invalid_argument("rectangle must be nondegenerate inside the unit square");
  }
}

double sample_in(double lo, double hi, Rng& rng) { return lo + rng.uniform01() * (hi - lo); }

// Sequence rectangles live on the 2^-26 grid: coordinates stay exactly
// representable through sums, areas (52-bit products), and the halving affine
// image, so certified smoothness is exact instead of rounding noise.
// Dimensions round up (certifying at least the requested sigma), positions
// round down (staying inside the square).
constexpr double kSnapScale = 0x1.0p26;

double snap_up(double v) { return std::ceil(v * kSnapScale) / kSnapScale; }
double snap_down(double v) { return std::floor(v * kSnapScale) / kSnapScale; }

}  // namespace

SmoothDistribution SmoothDistribution::uniform_square() {
  SmoothDistribution d;
  d.kind_ = Kind::UniformSquare;
  return d;
}

SmoothDistribution SmoothDistribution::uniform_rect(const Rect& r) {
  check_rect(r);
  SmoothDistribution d;
  d.kind_ = Kind::UniformRect;
  d.rects_ = {r};
  return d;
}

SmoothDistribution SmoothDistribution::rect_mixture(std::vector<Rect> rects,
                                                    std::vector<double> weights) {
  if (rects.empty() || rects.size() != weights.size()) {
    throw std::invalid_argument("mixture needs matching nonempty rects and weights");
  }
  double total = 0.0;
  for (double w : weights) {
    if (w <= 0.0) throw std::invalid_argument("mixture weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("mixture weights must sum to 1");
  }
  for (const Rect& r : rects) check_rect(r);
  SmoothDistribution d;
  d.kind_ = Kind::RectMixture;
  d.rects_ = std::move(rects);
  d.weights_ = std::move(weights);
  return d;
}

SmoothDistribution SmoothDistribution::piecewise_grid(int resolution,
                                                      std::vector<double> densities) {
  if (resolution < 1 || resolution > 1024) {
    throw std::invalid_argument("grid resolution out of range");
  }
  const std::size_t cells = static_cast<std::size_t>(resolution) * resolution;
  if (densities.size() != cells) {
    throw std::invalid_argument("need one density per grid cell");
  }
  double mass = 0.0;
  for (double v : densities) {
    if (v < 0.0 || !std::isfinite(v)) throw std::invalid_argument("bad cell density");
    mass += v;
  }
  mass /= static_cast<double>(cells);
  if (std::abs(mass - 1.0) > 1e-12) {
    throw std::invalid_argument("cell masses must sum to 1");
  }
  SmoothDistribution d;
  d.kind_ = Kind::PiecewiseGrid;
  d.resolution_ = resolution;
  d.densities_ = std::move(densities);
  d.cum_.reserve(cells);
  double acc = 0.0;
  for (double v : d.densities_) {
    acc += v / static_cast<double>(cells);
    d.cum_.push_back(acc);
  }
  d.cum_.back() = 1.0;
  return d;
}

double SmoothDistribution::certify_sigma() const {
  switch (kind_) {
    case Kind::UniformSquare:
      return 1.0;
    case Kind::UniformRect:
      return rects_.front().area();
    case Kind::RectMixture: {
      // Density is constant on each cell of the edge arrangement; probing one
      // interior point per cell is exact.
      std::set<double> xs, ys;
      for (const Rect& r : rects_) {
        xs.insert(r.x0);
        xs.insert(r.x1);
        ys.insert(r.y0);
        ys.insert(r.y1);
      }
      std::vector<double> xe(xs.begin(), xs.end()), ye(ys.begin(), ys.end());
      double max_density = 0.0;
      for (std::size_t i = 0; i + 1 < xe.size(); ++i) {
        for (std::size_t j = 0; j + 1 < ye.size(); ++j) {
          const double cx = xe[i] + (xe[i + 1] - xe[i]) / 2;
          const double cy = ye[j] + (ye[j + 1] - ye[j]) / 2;
          max_density = std::max(max_density, density_at(cx, cy));
        }
      }
      return 1.0 / max_density;
    }
    case Kind::PiecewiseGrid:
      return 1.0 / *std::max_element(densities_.begin(), densities_.end());
  }
  throw std::logic_error("unreachable");
}

Valuation SmoothDistribution::sample(Rng& rng) const {
  switch (kind_) {
    case Kind::UniformSquare:
      return {rng.uniform01(), rng.uniform01()};
    case Kind::UniformRect: {
      const Rect& r = rects_.front();
      return {sample_in(r.x0, r.x1, rng), sample_in(r.y0, r.y1, rng)};
    }
    case Kind::RectMixture: {
      const double u = rng.uniform01();
      std::size_t i = 0;
      double acc = 0.0;
      for (; i + 1 < weights_.size(); ++i) {
        acc += weights_[i];
        if (u < acc) break;
      }
      const Rect& r = rects_[i];
      return {sample_in(r.x0, r.x1, rng), sample_in(r.y0, r.y1, rng)};
    }
    case Kind::PiecewiseGrid: {
      const double u = rng.uniform01();
      const auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
      const auto cell = static_cast<std::size_t>(
          std::min(it - cum_.begin(), std::ssize(cum_) - 1));
      const int ix = static_cast<int>(cell) % resolution_;
      const int iy = static_cast<int>(cell) / resolution_;
      const double w = 1.0 / resolution_;
      return {sample_in(ix * w, (ix + 1) * w, rng), sample_in(iy * w, (iy + 1) * w, rng)};
    }
  }
  throw std::logic_error("unreachable");
}

double SmoothDistribution::density_at(double x, double y) const {
  switch (kind_) {
    case Kind::UniformSquare:
      return (x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0) ? 1.0 : 0.0;
    case Kind::UniformRect:
      return rects_.front().contains(x, y) ? 1.0 / rects_.front().area() : 0.0;
    case Kind::RectMixture: {
      double d = 0.0;
      for (std::size_t i = 0; i < rects_.size(); ++i) {
        if (rects_[i].contains(x, y)) d += weights_[i] / rects_[i].area();
      }
      return d;
    }
    case Kind::PiecewiseGrid: {
      if (x < 0.0 || x >= 1.0 || y < 0.0 || y >= 1.0) return 0.0;
      const int ix = std::min(static_cast<int>(x * resolution_), resolution_ - 1);
      const int iy = std::min(static_cast<int>(y * resolution_), resolution_ - 1);
      return densities_[static_cast<std::size_t>(iy) * resolution_ + ix];
    }
  }
  throw std::logic_error("unreachable");
}

nlohmann::json SmoothDistribution::to_json() const {
  nlohmann::json j;
  auto rect_json = [](const Rect& r) { return nlohmann::json{r.x0, r.x1, r.y0, r.y1}; };
  switch (kind_) {
    case Kind::UniformSquare:
      j["kind"] = "uniform-square";
      break;
    case Kind::UniformRect:
      j["kind"] = "uniform-rect";
      j["rect"] = rect_json(rects_.front());
      break;
    case Kind::RectMixture: {
      j["kind"] = "rect-mixture";
      auto arr = nlohmann::json::array();
      for (const Rect& r : rects_) arr.push_back(rect_json(r));
      j["rects"] = arr;
      j["weights"] = weights_;
      break;
    }
    case Kind::PiecewiseGrid:
      j["kind"] = "piecewise-grid";
      j["resolution"] = resolution_;
      j["densities"] = densities_;
      break;
  }
  return j;
}

SmoothDistribution SmoothDistribution::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  auto rect_from = [](const nlohmann::json& a) {
    if (!a.is_array() || a.size() != 4) {
      throw std::invalid_argument("rect must be [x0, x1, y0, y1]");
    }
    return Rect{a[0].get<double>(), a[1].get<double>(), a[2].get<double>(), a[3].get<double>()};
  };
  if (kind == "uniform-square") return uniform_square();
  if (kind == "uniform-rect") return uniform_rect(rect_from(j.at("rect")));
  if (kind == "rect-mixture") {
    std::vector<Rect> rects;
    for (const auto& r : j.at("rects")) rects.push_back(rect_from(r));
    return rect_mixture(std::move(rects), j.at("weights").get<std::vector<double>>());
  }
  if (kind == "piecewise-grid") {
    return piecewise_grid(j.at("resolution").get<int>(),
                          j.at("densities").get<std::vector<double>>());
  }
  throw std::invalid_argument(fmt::format("unknown distribution kind '{}'", kind));
}

AdversarySequence make_sequence(const std::string& kind, int rounds, double sigma,
                                std::uint64_t seed) {
  if (rounds < 1) throw std::invalid_argument("need at least one round");
  if (!(sigma > 0.0 && sigma <= 1.0)) throw std::invalid_argument("sigma must be in (0, 1]");

  AdversarySequence seq;
  seq.kind = kind;
  seq.rounds.reserve(static_cast<std::size_t>(rounds));

  if (kind == "stationary") {
    SmoothDistribution base = SmoothDistribution::uniform_square();
    if (sigma < 1.0) {
      const double side = std::min(1.0, snap_up(std::sqrt(sigma)));
      Rng rng(Rng::derive(seed, 0));
      const double x0 = snap_down(rng.uniform01() * (1.0 - side));
      const double y0 = snap_down(rng.uniform01() * (1.0 - side));
      base = SmoothDistribution::uniform_rect({x0, x0 + side, y0, y0 + side});
    }
    for (int t = 0; t < rounds; ++t) seq.rounds.push_back(base);
  } else if (kind == "drifting-rectangle") {
    // Area-sigma square sliding along the anti-diagonal, one step per round.
    const double side = std::min(1.0, snap_up(std::sqrt(sigma)));
    const double span = 1.0 - side;
    for (int t = 0; t < rounds; ++t) {
      const double a = rounds == 1 ? 0.0 : static_cast<double>(t) / (rounds - 1);
      const double x0 = snap_down(a * span);
      const double y0 = snap_down((1.0 - a) * span);
      seq.rounds.push_back(SmoothDistribution::uniform_rect({x0, x0 + side, y0, y0 + side}));
    }
  } else if (kind == "switching-mixture") {
    // Four equal blocks; each block draws a fresh two-rectangle half/half
    // mixture with disjoint supports of area sigma/2, so the density is
    // exactly 1/sigma wherever positive.
    constexpr int kBlocks = 4;
    const double height = std::min(1.0, snap_up(sigma));
    std::vector<SmoothDistribution> per_block;
    for (int b = 0; b < kBlocks; ++b) {
      Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(b)));
      const double y1 = snap_down(rng.uniform01() * (1.0 - height));
      const double y2 = snap_down(rng.uniform01() * (1.0 - height));
      per_block.push_back(SmoothDistribution::rect_mixture(
          {{0.0, 0.5, y1, y1 + height}, {0.5, 1.0, y2, y2 + height}}, {0.5, 0.5}));
    }
    for (int t = 0; t < rounds; ++t) {
      const int b = std::min(kBlocks - 1, t * kBlocks / rounds);
      seq.rounds.push_back(per_block[static_cast<std::size_t>(b)]);
    }
  } else {
    throw std::invalid_argument(fmt::format("unknown adversary kind '{}'", kind));
  }

  double certified = 1.0;
  for (const auto& d : seq.rounds) certified = std::min(certified, d.certify_sigma());
  seq.sigma = certified;
  return seq;
}

}  // namespace hiermech
