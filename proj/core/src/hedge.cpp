#include "hiermech/hedge.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hiermech {

HedgeState::HedgeState(int actions, double eta) : eta_(eta) {
  if (actions < 1) throw std::invalid_argument("hedge needs at least one action");
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw std::invalid_argument("hedge learning rate must be positive and finite");
  }
  log_weights_.assign(static_cast<std::size_t>(actions), 0.0);
}

std::vector<double> HedgeState::probabilities() const {
  const double mx = *std::max_element(log_weights_.begin(), log_weights_.end());
  std::vector<double> probs(log_weights_.size());
  double total = 0.0;
  for (std::size_t a = 0; a < log_weights_.size(); ++a) {
    probs[a] = std::exp(log_weights_[a] - mx);
    total += probs[a];
  }
  for (double& p : probs) p /= total;
  return probs;
}

int HedgeState::sample(Rng& rng) const {
  const double mx = *std::max_element(log_weights_.begin(), log_weights_.end());
  double total = 0.0;
  for (const double lw : log_weights_) total += std::exp(lw - mx);
  const double u = rng.uniform01() * total;
  double acc = 0.0;
  for (std::size_t a = 0; a + 1 < log_weights_.size(); ++a) {
    acc += std::exp(log_weights_[a] - mx);
    if (u < acc) return static_cast<int>(a);
  }
  return static_cast<int>(log_weights_.size()) - 1;
}

void HedgeState::update(std::span<const double> rewards) {
  if (std::ssize(rewards) != actions()) {
    throw std::invalid_argument("reward vector size must match the action count");
  }
  for (const double r : rewards) {
    if (!(r >= -1.0 && r <= 1.0)) {
      throw std::invalid_argument("hedge rewards must lie in [-1, 1]");
    }
  }
  for (std::size_t a = 0; a < log_weights_.size(); ++a) {
    log_weights_[a] += eta_ * rewards[a];
  }
  ++rounds_;
}

}  // namespace hiermech
