#include "hiermech/mechtree.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <map>
#include <stdexcept>

namespace hiermech {

std::vector<GridMechanism> children_of(const GridMechanism& m) {
  const std::int32_t n = m.size();
  std::vector<GridMechanism> out;
  std::vector<std::int32_t> fine(static_cast<std::size_t>(n) * 2);

  // Column pair (2c, 2c+1) of a child must have max rounding up to the coarse
  // level L_c, i.e. fine[2c+1] in {2L-1, 2L} (just 0 when L = 0); the first
  // entry of the pair ranges freely between its neighbors.
  auto rec = [&](auto&& self, std::int32_t c, std::int32_t prev) -> void {
    if (c == n) {
      if (fine.back() > 0) {  // drop the always-allocate refinement
        out.emplace_back(m.level() + 1, fine);
      }
      return;
    }
    const std::int32_t coarse = m.col_levels()[static_cast<std::size_t>(c)];
    const std::int32_t lo_choice = coarse == 0 ? 0 : 2 * coarse - 1;
    for (std::int32_t b = lo_choice; b <= 2 * coarse; ++b) {
      if (b < prev) continue;
      for (std::int32_t f = prev; f <= b; ++f) {
        fine[static_cast<std::size_t>(2 * c)] = f;
        fine[static_cast<std::size_t>(2 * c) + 1] = b;
        self(self, c + 1, b);
      }
    }
  };
  rec(rec, 0, 0);
  std::sort(out.begin(), out.end());
  return out;
}

MechanismTree MechanismTree::build(int height, bool force_large) {
  if (height < 0) throw std::invalid_argument("tree height must be nonnegative");
  if (height > 3) {
    if (!force_large) {
      throw std::invalid_argument(
          "tree height above 3 needs force_large; note height 4 holds ~6e8 nodes");
    }
    // Even forced, the level-4 family does not fit in memory as a tree.
    throw std::invalid_argument("tree height above 3 is not materializable");
  }

  MechanismTree t;
  t.height_ = height;
  t.levels_.resize(static_cast<std::size_t>(height) + 1);
  t.levels_[0].push_back(TreeNode{empty_mechanism(0), -1, {}});

  for (int h = 0; h < height; ++h) {
    struct Pending {
      GridMechanism mech;
      std::int32_t parent;
    };
    std::vector<Pending> pend;
    auto& cur = t.levels_[static_cast<std::size_t>(h)];
    for (std::size_t i = 0; i < cur.size(); ++i) {
      for (auto& child : children_of(cur[i].mech)) {
        pend.push_back(Pending{std::move(child), static_cast<std::int32_t>(i)});
      }
    }
    std::sort(pend.begin(), pend.end(),
              [](const Pending& a, const Pending& b) { return a.mech < b.mech; });
    auto& next = t.levels_[static_cast<std::size_t>(h) + 1];
    next.reserve(pend.size());
    for (std::size_t j = 0; j < pend.size(); ++j) {
      if (j > 0 && pend[j].mech == pend[j - 1].mech) {
        throw std::logic_error("duplicate child: refinement sets must be disjoint");
      }
      cur[static_cast<std::size_t>(pend[j].parent)].children.push_back(
          static_cast<std::int32_t>(j));
      next.push_back(TreeNode{std::move(pend[j].mech), pend[j].parent, {}});
    }
  }
  return t;
}

const std::vector<TreeNode>& MechanismTree::level(int h) const {
  if (h < 0 || h > height_) {
    throw std::out_of_range(fmt::format("tree level {} outside [0, {}]", h, height_));
  }
  return levels_[static_cast<std::size_t>(h)];
}

std::size_t MechanismTree::node_count() const {
  std::size_t total = 0;
  for (const auto& lvl : levels_) total += lvl.size();
  return total;
}

std::optional<std::int32_t> MechanismTree::find(const GridMechanism& m) const {
  if (m.level() > height_) return std::nullopt;
  const auto& lvl = levels_[static_cast<std::size_t>(m.level())];
  const auto it = std::lower_bound(lvl.begin(), lvl.end(), m,
                                   [](const TreeNode& n, const GridMechanism& v) {
                                     return n.mech.col_levels() < v.col_levels();
                                   });
  if (it == lvl.end() || !(it->mech == m)) return std::nullopt;
  return static_cast<std::int32_t>(it - lvl.begin());
}

std::vector<GridMechanism> MechanismTree::path_to_root(const GridMechanism& m) const {
  auto idx = find(m);
  if (!idx) throw std::invalid_argument("mechanism is not a node of this tree");
  std::vector<GridMechanism> chain;
  chain.reserve(static_cast<std::size_t>(m.level()) + 1);
  std::int32_t i = *idx;
  for (int h = m.level(); h >= 0; --h) {
    const TreeNode& node = levels_[static_cast<std::size_t>(h)][static_cast<std::size_t>(i)];
    chain.push_back(node.mech);
    i = node.parent;
  }
  return chain;
}

nlohmann::json MechanismTree::summary() const {
  nlohmann::json levels = nlohmann::json::array();
  for (int h = 0; h <= height_; ++h) {
    const auto& lvl = levels_[static_cast<std::size_t>(h)];
    std::map<std::size_t, std::size_t> hist;
    for (const auto& node : lvl) ++hist[node.children.size()];
    auto hist_json = nlohmann::json::array();
    for (const auto& [children, count] : hist) {
      hist_json.push_back({children, count});
    }
    nlohmann::json entry;
    entry["h"] = h;
    entry["nodes"] = lvl.size();
    if (h <= 5) entry["family_size"] = grid_family_size(h);
    if (h < height_) entry["child_histogram"] = hist_json;
    levels.push_back(entry);
  }
  nlohmann::json j;
  j["height"] = height_;
  j["total_nodes"] = node_count();
  j["levels"] = levels;
  return j;
}

}  // namespace hiermech
