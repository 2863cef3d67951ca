#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "hiermech/gridmech.hpp"

namespace hiermech {

// Refinements of m one level finer whose inner approximation maps back to m,
// in lexicographic order. The always-allocate mechanism is never produced.
std::vector<GridMechanism> children_of(const GridMechanism& m);

struct TreeNode {
  GridMechanism mech;
  std::int32_t parent = -1;            // index within the level above
  std::vector<std::int32_t> children;  // indices within the level below
};

// Hierarchy of grid mechanisms: level 0 holds only the coarse empty
// mechanism, level h+1 holds every child of level h, and each node's parent
// is its inner approximation one level up. Nodes are stored per level in
// lexicographic order.
class MechanismTree {
 public:
  static MechanismTree build(int height, bool force_large = false);

  int height() const { return height_; }
  const std::vector<TreeNode>& level(int h) const;
  std::size_t node_count() const;

  std::optional<std::int32_t> find(const GridMechanism& m) const;

  // The chain m, approx(m), ..., root. Throws if m is not a tree node.
  std::vector<GridMechanism> path_to_root(const GridMechanism& m) const;

  nlohmann::json summary() const;

 private:
  int height_ = 0;
  std::vector<std::vector<TreeNode>> levels_;
};

}  // namespace hiermech
