#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hiermech/geometry.hpp"
#include "hiermech/rng.hpp"

namespace hiermech {

// Distribution over valuations with density bounded by 1/sigma relative to
// the uniform square. All supported families have piecewise-constant density,
// so the certified sigma is computed from exact density maxima, not samples.
class SmoothDistribution {
 public:
  enum class Kind { UniformSquare, UniformRect, RectMixture, PiecewiseGrid };

  struct Rect {
    double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;

    double area() const { return (x1 - x0) * (y1 - y0); }
    // Half-open containment so overlapping edges never double-count.
    bool contains(double x, double y) const {
      return x >= x0 && x < x1 && y >= y0 && y < y1;
    }
  };

  static SmoothDistribution uniform_square();
  static SmoothDistribution uniform_rect(const Rect& r);
  static SmoothDistribution rect_mixture(std::vector<Rect> rects, std::vector<double> weights);
  // resolution x resolution grid of relative densities, row-major with index
  // iy * resolution + ix; cell masses are density / resolution^2 and must sum
  // to 1 within 1e-12.
  static SmoothDistribution piecewise_grid(int resolution, std::vector<double> densities);

  Kind kind() const { return kind_; }

  // Largest sigma such that the density never exceeds 1/sigma.
  double certify_sigma() const;

  Valuation sample(Rng& rng) const;

  double density_at(double x, double y) const;

  const std::vector<Rect>& rects() const { return rects_; }
  const std::vector<double>& weights() const { return weights_; }
  int resolution() const { return resolution_; }
  const std::vector<double>& densities() const { return densities_; }

  nlohmann::json to_json() const;
  static SmoothDistribution from_json(const nlohmann::json& j);

 private:
  SmoothDistribution() = default;

  Kind kind_ = Kind::UniformSquare;
  std::vector<Rect> rects_;      // UniformRect, RectMixture
  std::vector<double> weights_;  // RectMixture
  int resolution_ = 0;           // PiecewiseGrid
  std::vector<double> densities_;
  std::vector<double> cum_;  // cumulative cell masses for grid sampling
};

// Oblivious adversary: one distribution per round, fixed up front.
struct AdversarySequence {
  std::string kind;
  // Exact min of certify_sigma over rounds (within rounding of the request).
  double sigma = 1.0;
  std::vector<SmoothDistribution> rounds;
};

// kind is one of "stationary", "drifting-rectangle", "switching-mixture".
AdversarySequence make_sequence(const std::string& kind, int rounds, double sigma,
                                std::uint64_t seed);

}  // namespace hiermech
