#include "hiermech/learners.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace hiermech {

namespace {

void check_valuation(const Valuation& v) {
  if (!v.in_unit_square()) {
    throw std::invalid_argument("valuation outside the unit square");
  }
}

}  // namespace

int HierMechLearner::default_height(std::int64_t rounds) {
  if (rounds < 1) throw std::invalid_argument("rounds must be positive");
  const int k = rounds <= 1 ? 0 : std::bit_width(static_cast<std::uint64_t>(rounds - 1));
  return (k + 1) / 2;
}

HierMechLearner::HierMechLearner(std::int64_t rounds, std::optional<int> height,
                                 std::uint64_t seed, bool force_large,
                                 std::shared_ptr<const MechanismTree> tree)
    : rng_(seed), rounds_budget_(rounds) {
  if (rounds < 1) throw std::invalid_argument("rounds must be positive");
  const int h = height.value_or(default_height(rounds));
  if (tree) {
    if (tree->height() != h) {
      throw std::invalid_argument("shared tree height does not match the requested height");
    }
    tree_ = std::move(tree);
  } else {
    tree_ = std::make_shared<const MechanismTree>(MechanismTree::build(h, force_large));
  }

  const double sqrt_rounds = std::sqrt(static_cast<double>(rounds));
  hedges_.resize(static_cast<std::size_t>(h));
  sampled_.resize(static_cast<std::size_t>(h));
  targets_.resize(static_cast<std::size_t>(h));
  profit_units_.resize(static_cast<std::size_t>(h) + 1);
  for (int lv = 0; lv <= h; ++lv) {
    profit_units_[static_cast<std::size_t>(lv)].resize(tree_->level(lv).size());
  }
  for (int lv = 0; lv < h; ++lv) {
    const auto& nodes = tree_->level(lv);
    const double eta = std::ldexp(1.0, lv) / sqrt_rounds;
    auto& row = hedges_[static_cast<std::size_t>(lv)];
    row.reserve(nodes.size());
    for (const auto& node : nodes) {
      row.emplace_back(static_cast<int>(node.children.size()), eta);
    }
    sampled_[static_cast<std::size_t>(lv)].resize(nodes.size());
    targets_[static_cast<std::size_t>(lv)].resize(nodes.size());
  }
}

const HedgeState& HierMechLearner::hedge_at(int h, std::int32_t node) const {
  return hedges_.at(static_cast<std::size_t>(h)).at(static_cast<std::size_t>(node));
}

std::span<const std::int32_t> HierMechLearner::sampled_children(int h) const {
  return sampled_.at(static_cast<std::size_t>(h));
}

std::span<const std::int32_t> HierMechLearner::target_leaves(int h) const {
  return targets_.at(static_cast<std::size_t>(h));
}

std::span<const double> HierMechLearner::last_root_rewards() const { return root_rewards_; }

const GridMechanism& HierMechLearner::predict() {
  if (predicted_) throw std::logic_error("predict() called twice in a round");
  const int h = tree_->height();
  // Hedges draw in (level, node) order; replay depends only on the seed.
  for (int lv = 0; lv < h; ++lv) {
    const auto& nodes = tree_->level(lv);
    auto& picks = sampled_[static_cast<std::size_t>(lv)];
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const int k = hedges_[static_cast<std::size_t>(lv)][i].sample(rng_);
      picks[i] = nodes[i].children[static_cast<std::size_t>(k)];
    }
  }
  for (int lv = h - 1; lv >= 0; --lv) {
    auto& tgt = targets_[static_cast<std::size_t>(lv)];
    const auto& picks = sampled_[static_cast<std::size_t>(lv)];
    for (std::size_t i = 0; i < tgt.size(); ++i) {
      tgt[i] = lv == h - 1 ? picks[i]
                           : targets_[static_cast<std::size_t>(lv) + 1]
                                     [static_cast<std::size_t>(picks[i])];
    }
  }
  predicted_ = true;
  const std::size_t leaf = h == 0 ? 0 : static_cast<std::size_t>(targets_[0][0]);
  return tree_->level(h)[leaf].mech;
}

void HierMechLearner::update(const Valuation& v) {
  if (!predicted_) throw std::logic_error("update() before predict()");
  check_valuation(v);
  const int h = tree_->height();
  for (int lv = 0; lv <= h; ++lv) {
    const int c = column_of(v.vs, lv);
    const int r = row_of(v.vb, lv);
    const auto& nodes = tree_->level(lv);
    auto& pu = profit_units_[static_cast<std::size_t>(lv)];
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      pu[i] = nodes[i].mech.profit_units(c, r);
    }
  }
  const auto& leaf_units = profit_units_[static_cast<std::size_t>(h)];
  for (int lv = 0; lv < h; ++lv) {
    const auto& nodes = tree_->level(lv);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const double own =
          std::ldexp(static_cast<double>(profit_units_[static_cast<std::size_t>(lv)][i]), -lv);
      const auto& kids = nodes[i].children;
      reward_buf_.resize(kids.size());
      for (std::size_t k = 0; k < kids.size(); ++k) {
        const std::int32_t child = kids[k];
        const std::int32_t leaf =
            lv == h - 1 ? child
                        : targets_[static_cast<std::size_t>(lv) + 1][static_cast<std::size_t>(child)];
        const double target_profit =
            std::ldexp(static_cast<double>(leaf_units[static_cast<std::size_t>(leaf)]), -h);
        reward_buf_[k] = 0.5 * (target_profit - own);
      }
      hedges_[static_cast<std::size_t>(lv)][i].update(reward_buf_);
      if (lv == 0 && i == 0) root_rewards_ = reward_buf_;
    }
  }
  predicted_ = false;
  ++round_;
}

FlatHedgeLearner::FlatHedgeLearner(int level, std::int64_t rounds, std::uint64_t seed)
    : level_(level),
      mechs_(enumerate_grid(level)),
      hedge_(1, 1.0),  // replaced below once the action count is known
      rng_(seed) {
  if (rounds < 1) throw std::invalid_argument("rounds must be positive");
  if (!mechs_.front().is_always_allocate()) {
    throw std::logic_error("enumeration must start at the always-allocate mechanism");
  }
  mechs_.erase(mechs_.begin());
  const auto n = static_cast<double>(mechs_.size());
  hedge_ = HedgeState(static_cast<int>(mechs_.size()),
                      std::sqrt(std::log(n) / static_cast<double>(rounds)));
}

const GridMechanism& FlatHedgeLearner::predict() {
  if (predicted_) throw std::logic_error("predict() called twice in a round");
  current_ = hedge_.sample(rng_);
  predicted_ = true;
  return mechs_[static_cast<std::size_t>(current_)];
}

void FlatHedgeLearner::update(const Valuation& v) {
  if (!predicted_) throw std::logic_error("update() before predict()");
  check_valuation(v);
  const int c = column_of(v.vs, level_);
  const int r = row_of(v.vb, level_);
  reward_buf_.resize(mechs_.size());
  for (std::size_t i = 0; i < mechs_.size(); ++i) {
    reward_buf_[i] = std::ldexp(static_cast<double>(mechs_[i].profit_units(c, r)), -level_);
  }
  hedge_.update(reward_buf_);
  predicted_ = false;
}

UniformRandomLearner::UniformRandomLearner(int level, std::uint64_t seed)
    : level_(level), mechs_(enumerate_grid(level)), rng_(seed) {
  mechs_.erase(mechs_.begin());  // drop always-allocate, as in the tree
}

const GridMechanism& UniformRandomLearner::predict() {
  if (predicted_) throw std::logic_error("predict() called twice in a round");
  current_ = static_cast<std::int32_t>(rng_.uniform_below(mechs_.size()));
  predicted_ = true;
  return mechs_[static_cast<std::size_t>(current_)];
}

void UniformRandomLearner::update(const Valuation& v) {
  if (!predicted_) throw std::logic_error("update() before predict()");
  check_valuation(v);
  predicted_ = false;
}

}  // namespace hiermech
