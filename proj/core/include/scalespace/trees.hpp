#pragma once

#include <limits>
#include <string>
#include <vector>

#include "scalespace/contours.hpp"

namespace scalespace {

enum class NodeKind { Root, Line, Arch };

struct TreeNode {
  NodeKind kind = NodeKind::Root;
  /// Arch apex scale; +infinity for Line and Root.
  double top_sigma = std::numeric_limits<double>::infinity();
  double x_left = 0.0;
  double x_right = 0.0;
  std::vector<TreeNode> children;  // left to right
};

struct ScaleTree {
  TreeNode root;
  std::size_t skipped_truncated = 0;
};

struct TreeOptions {
  /// Skip TruncatedAtWindow components instead of failing on them.
  bool tolerate_truncated = false;
  /// Interval containment slack, in x units.
  double nesting_tol = 1e-9;
};

/// Nests arches by axis-interval containment; lines always hang off the root.
/// Throws NestingConflict on partial overlap or a line inside an arch, and
/// TopologyViolation on truncated input unless tolerated.
ScaleTree build_tree(const ContourSet& contours, const TreeOptions& opt = {});

struct TreeSignature {
  std::string canonical_form;
  bool ordered = true;
};

/// "(" + children + ")" at the root; a node prints as its kind letter (L or A)
/// followed by "(" + children + ")" when it has any. ordered = false sorts
/// sibling encodings lexicographically.
TreeSignature canonicalize(const ScaleTree& tree, bool ordered);

bool tree_equal(const TreeSignature& a, const TreeSignature& b);

/// {kind, top_sigma, interval: [x0, x1], children}; "inf" for infinite tops.
std::string tree_json(const ScaleTree& tree, int indent = 2);

}  // namespace scalespace
