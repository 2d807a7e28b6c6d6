#include "scalespace/trees.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "json.hpp"
#include "scalespace/errors.hpp"

namespace scalespace {

namespace {

double arch_top(const LevelCurve& cv) {
  const auto& vs = cv.vertices;
  std::size_t j = 0;
  for (std::size_t i = 1; i < vs.size(); ++i) {
    if (vs[i].sigma > vs[j].sigma) j = i;
  }
  if (j == 0 || j + 1 >= vs.size()) return vs[j].sigma;
  // parabola sigma(x) through the apex vertex and its neighbours
  const double x0 = vs[j - 1].x, x1 = vs[j].x, x2 = vs[j + 1].x;
  const double s0 = vs[j - 1].sigma, s1 = vs[j].sigma, s2 = vs[j + 1].sigma;
  if (x0 == x1 || x1 == x2 || x0 == x2) return s1;
  const double d01 = (s1 - s0) / (x1 - x0), d12 = (s2 - s1) / (x2 - x1);
  const double a = (d12 - d01) / (x2 - x0);
  if (!(a < 0.0)) return s1;
  const double b = d01 - a * (x0 + x1);
  const double xv = -b / (2.0 * a);
  const double top = s1 + a * (xv - x1) * (xv - x1) + (b + 2.0 * a * x1) * (xv - x1);
  return std::max(s1, top);
}

bool contains(const TreeNode& outer, const TreeNode& inner, double tol) {
  return inner.x_left >= outer.x_left - tol && inner.x_right <= outer.x_right + tol;
}

bool overlaps(const TreeNode& a, const TreeNode& b, double tol) {
  return a.x_left < b.x_right - tol && b.x_left < a.x_right - tol;
}

void insert(TreeNode& parent, TreeNode node, double tol) {
  for (auto& child : parent.children) {
    if (child.kind == NodeKind::Arch && contains(child, node, tol)) {
      if (node.kind == NodeKind::Line) {
        throw NestingConflict("line at x = " + std::to_string(node.x_left) + " sits inside an arch");
      }
      insert(child, std::move(node), tol);
      return;
    }
    if (overlaps(child, node, tol) || (child.kind == NodeKind::Line && contains(node, child, tol))) {
      throw NestingConflict("intervals [" + std::to_string(child.x_left) + ", " + std::to_string(child.x_right) +
                            "] and [" + std::to_string(node.x_left) + ", " + std::to_string(node.x_right) +
                            "] partially overlap");
    }
  }
  auto pos = std::upper_bound(parent.children.begin(), parent.children.end(), node.x_left,
                              [](double x, const TreeNode& c) { return x < c.x_left; });
  parent.children.insert(pos, std::move(node));
}

std::string encode(const TreeNode& node, bool ordered) {
  std::vector<std::string> parts;
  parts.reserve(node.children.size());
  for (const auto& c : node.children) parts.push_back(encode(c, ordered));
  if (!ordered) std::sort(parts.begin(), parts.end());
  std::string inner;
  for (const auto& s : parts) inner += s;
  if (node.kind == NodeKind::Root) return "(" + inner + ")";
  const std::string letter = node.kind == NodeKind::Line ? "L" : "A";
  return parts.empty() ? letter : letter + "(" + inner + ")";
}

nlohmann::ordered_json to_json(const TreeNode& node) {
  nlohmann::ordered_json j;
  j["kind"] = node.kind == NodeKind::Root ? "root" : (node.kind == NodeKind::Line ? "line" : "arch");
  if (std::isinf(node.top_sigma)) {
    j["top_sigma"] = "inf";
  } else {
    j["top_sigma"] = node.top_sigma;
  }
  j["interval"] = {node.x_left, node.x_right};
  j["children"] = nlohmann::ordered_json::array();
  for (const auto& c : node.children) j["children"].push_back(to_json(c));
  return j;
}

}  // namespace

ScaleTree build_tree(const ContourSet& contours, const TreeOptions& opt) {
  ScaleTree tree;
  std::vector<TreeNode> nodes;
  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (const auto& cv : contours.curves) {
    if (cv.kind == CurveKind::TruncatedAtWindow) {
      if (!opt.tolerate_truncated) {
        throw TopologyViolation("truncated component in tree input; widen the window or tolerate it");
      }
      ++tree.skipped_truncated;
      continue;
    }
    classify_component(cv, contours.c);
    TreeNode node;
    node.kind = cv.kind == CurveKind::Line ? NodeKind::Line : NodeKind::Arch;
    node.x_left = cv.axis_crossings.front();
    node.x_right = cv.axis_crossings.back();
    if (node.kind == NodeKind::Arch) node.top_sigma = arch_top(cv);
    lo = first ? node.x_left : std::min(lo, node.x_left);
    hi = first ? node.x_right : std::max(hi, node.x_right);
    first = false;
    nodes.push_back(std::move(node));
  }
  // widest first so parents exist before their children
  std::stable_sort(nodes.begin(), nodes.end(), [](const TreeNode& a, const TreeNode& b) {
    const double wa = a.x_right - a.x_left, wb = b.x_right - b.x_left;
    if (wa != wb) return wa > wb;
    return a.x_left < b.x_left;
  });
  tree.root.x_left = lo;
  tree.root.x_right = hi;
  for (auto& n : nodes) insert(tree.root, std::move(n), opt.nesting_tol);
  return tree;
}

TreeSignature canonicalize(const ScaleTree& tree, bool ordered) {
  return {encode(tree.root, ordered), ordered};
}

bool tree_equal(const TreeSignature& a, const TreeSignature& b) {
  return a.canonical_form == b.canonical_form;
}

std::string tree_json(const ScaleTree& tree, int indent) { return to_json(tree.root).dump(indent); }

}  // namespace scalespace
