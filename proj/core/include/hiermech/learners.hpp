#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hiermech/adversary.hpp"
#include "hiermech/hedge.hpp"
#include "hiermech/mechtree.hpp"

namespace hiermech {

// One completed round as recorded by the harness.
struct RoundTrace {
  int t = 0;  // 1-based
  GridMechanism mechanism;
  Valuation v;
  Dyadic profit;     // this round, exact
  Dyadic cumulative; // running total at the mechanism level, exact
};

// Online learner protocol: strictly alternate predict() then update(v).
class Learner {
 public:
  virtual ~Learner() = default;

  virtual std::string name() const = 0;
  // Grid level of every mechanism this learner offers.
  virtual int mechanism_level() const = 0;
  virtual const GridMechanism& predict() = 0;
  virtual void update(const Valuation& v) = 0;
};

// Hierarchical learner: one hedge per internal tree node, choosing among the
// node's children. Each round every internal hedge samples a child; targets
// chain those choices down to a leaf, the root's target is offered, and each
// hedge's rewards are half the profit difference between a child's target
// leaf and the node's own mechanism.
class HierMechLearner : public Learner {
 public:
  // height defaults to ceil(ceil(log2 rounds) / 2); the learning rate at
  // level h is 2^h / sqrt(rounds). A prebuilt tree of matching height can be
  // shared across instances.
  HierMechLearner(std::int64_t rounds, std::optional<int> height, std::uint64_t seed,
                  bool force_large = false,
                  std::shared_ptr<const MechanismTree> tree = nullptr);

  std::string name() const override { return "hier-mech"; }
  int mechanism_level() const override { return tree_->height(); }
  const GridMechanism& predict() override;
  void update(const Valuation& v) override;

  const MechanismTree& tree() const { return *tree_; }
  const HedgeState& hedge_at(int h, std::int32_t node) const;

  // Introspection for the most recent round (valid after predict()).
  std::span<const std::int32_t> sampled_children(int h) const;
  std::span<const std::int32_t> target_leaves(int h) const;
  // Root hedge rewards from the most recent update().
  std::span<const double> last_root_rewards() const;

  static int default_height(std::int64_t rounds);

 private:
  std::shared_ptr<const MechanismTree> tree_;
  Rng rng_;
  std::int64_t rounds_budget_ = 0;
  std::int64_t round_ = 0;
  bool predicted_ = false;
  std::vector<std::vector<HedgeState>> hedges_;        // per level < height
  std::vector<std::vector<std::int32_t>> sampled_;     // child index, per node
  std::vector<std::vector<std::int32_t>> targets_;     // leaf index, per node
  std::vector<std::vector<std::int32_t>> profit_units_;  // per level, per node
  std::vector<double> root_rewards_;
  std::vector<double> reward_buf_;
};

// Single hedge over every grid mechanism of one level except always-allocate,
// with learning rate sqrt(log(actions) / rounds).
class FlatHedgeLearner : public Learner {
 public:
  FlatHedgeLearner(int level, std::int64_t rounds, std::uint64_t seed);

  std::string name() const override { return "flat-hedge"; }
  int mechanism_level() const override { return level_; }
  const GridMechanism& predict() override;
  void update(const Valuation& v) override;

  const HedgeState& hedge() const { return hedge_; }
  const std::vector<GridMechanism>& actions() const { return mechs_; }

 private:
  int level_ = 0;
  std::vector<GridMechanism> mechs_;
  HedgeState hedge_;
  Rng rng_;
  std::int32_t current_ = 0;
  bool predicted_ = false;
  std::vector<double> reward_buf_;
};

// Control: a uniformly random mechanism of the level each round, no learning.
class UniformRandomLearner : public Learner {
 public:
  UniformRandomLearner(int level, std::uint64_t seed);

  std::string name() const override { return "uniform-random"; }
  int mechanism_level() const override { return level_; }
  const GridMechanism& predict() override;
  void update(const Valuation& v) override;

 private:
  int level_ = 0;
  std::vector<GridMechanism> mechs_;
  Rng rng_;
  std::int32_t current_ = 0;
  bool predicted_ = false;
};

}  // namespace hiermech
