#pragma once

#include <span>
#include <vector>

#include "hiermech/rng.hpp"

namespace hiermech {

// Multiplicative-weights state over a fixed action set with full-information
// reward updates. Weights are kept in log space (log w(a) = eta * total
// reward of a); probabilities subtract the max before exponentiating, so
// nothing overflows as long as eta * rounds stays moderate (~1e4).
class HedgeState {
 public:
  HedgeState(int actions, double eta);

  int actions() const { return static_cast<int>(log_weights_.size()); }
  double eta() const { return eta_; }
  int rounds() const { return rounds_; }
  const std::vector<double>& log_weights() const { return log_weights_; }

  std::vector<double> probabilities() const;

  // One draw from the current distribution (inverse-CDF on one uniform).
  int sample(Rng& rng) const;

  // Full reward vector for this round; entries must lie in [-1, 1].
  void update(std::span<const double> rewards);

 private:
  double eta_ = 0.0;
  int rounds_ = 0;
  std::vector<double> log_weights_;
};

}  // namespace hiermech
