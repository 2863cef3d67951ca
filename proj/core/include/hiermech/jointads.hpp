#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>

#include "hiermech/adversary.hpp"
#include "hiermech/gridmech.hpp"
#include "hiermech/learners.hpp"

namespace hiermech {

// Valuations of the two advertisers in the joint-ads auction.
struct JointValuation {
  double v1 = 0.0;
  double v2 = 0.0;

  bool in_unit_square() const {
    return v1 >= 0.0 && v1 <= 1.0 && v2 >= 0.0 && v2 <= 1.0;
  }
};

// The change of variables f(w) = ((1 - w.v1) / 2, (1 + w.v2) / 2) turning an
// ads valuation pair into a trade valuation. Its image is the quadrant
// Q = [0, 1/2] x [1/2, 1], where a trade pays the seller at most 1/2 and
// charges the buyer at least 1/2, so profit is never negative. Both f and
// its inverse round-trip bit-exactly (halving and the 1-x flips stay
// representable on every double the samplers produce).
Valuation f_map(const JointValuation& w);
JointValuation f_inv(const Valuation& v);
// Whether a trade valuation lies in Q.
bool in_quadrant(const Valuation& v);

// Zero out allocation outside Q: columns right of 1/2 close entirely,
// remaining levels rise to at least 1/2. Needs level >= 1.
GridMechanism clip_to_quadrant(const GridMechanism& m);
bool is_quadrant_contained(const GridMechanism& m);

struct JointPrices {
  double p1 = 0.0;
  double p2 = 0.0;
  bool allocated = false;
};

// Joint-ads mechanism obtained from a trade mechanism: its allocation region
// is the full-square preimage of the clipped trade region under f (the x-flip
// in f turns north-west monotone into north-east monotone), and each agent
// pays their threshold ("west"/"south" projections): p1 = 1 - 2p and
// p2 = 2q - 1 where (p, q) are the clipped trade thresholds at f(w). Revenue
// is p1 + p2, i.e. exactly twice the clipped mechanism's trade profit.
class JointAdsMechanism {
 public:
  explicit JointAdsMechanism(const GridMechanism& source);

  const GridMechanism& source() const { return source_; }
  const GridMechanism& clipped() const { return clipped_; }
  int level() const { return clipped_.level(); }

  bool is_allocated(const JointValuation& w) const;
  JointPrices prices(const JointValuation& w) const;
  double revenue(const JointValuation& w) const;
  // Exact revenue in units of 2^-level.
  Dyadic revenue_dyadic(const JointValuation& w) const;

 private:
  GridMechanism source_;
  GridMechanism clipped_;
};

// Runs any trade learner on the joint-ads problem: offered mechanisms are
// wrapped, observed joint valuations are fed to the inner learner through f.
class JointAdsLearner {
 public:
  explicit JointAdsLearner(std::unique_ptr<Learner> inner);

  std::string name() const { return inner_->name(); }
  int mechanism_level() const { return inner_->mechanism_level(); }
  const JointAdsMechanism& predict();
  void update(const JointValuation& w);
  const Learner& inner() const { return *inner_; }

 private:
  std::unique_ptr<Learner> inner_;
  std::unique_ptr<JointAdsMechanism> current_;
};

// Image under f of a smooth ads-side distribution: the trade-valuation
// stream the wrapper feeds its inner learner. Supported inside Q; densities
// scale by 4, so certified smoothness is exactly a quarter of the source's.
SmoothDistribution pushforward_f(const SmoothDistribution& d);

}  // namespace hiermech
