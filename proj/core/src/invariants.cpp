#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "json.hpp"
#include "scalespace/bifurcations.hpp"
#include "scalespace/errors.hpp"

namespace scalespace {

namespace {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

struct GraphComponent {
  std::size_t nodes = 0;
  std::size_t edges = 0;
  bool touches_lo = false;
  bool touches_top = false;
  std::size_t first_node = 0;
  int mu() const { return static_cast<int>(edges) - static_cast<int>(nodes) + 1; }
};

// Connected pieces of the tracking graph restricted to slices [0, top],
// ordered by their first node.
std::vector<GraphComponent> components_up_to(const SliceGraph& g, std::size_t top) {
  std::vector<std::size_t> offset(top + 2, 0);
  for (std::size_t s = 0; s <= top; ++s) offset[s + 1] = offset[s] + g.slices[s].comps.size();
  UnionFind uf(offset[top + 1]);
  for (const auto& e : g.edges) {
    if (e.slice + 1 <= top) uf.unite(offset[e.slice] + e.a, offset[e.slice + 1] + e.b);
  }
  std::map<std::size_t, std::size_t> slot;
  std::vector<GraphComponent> out;
  for (std::size_t s = 0; s <= top; ++s) {
    for (std::size_t i = offset[s]; i < offset[s + 1]; ++i) {
      const std::size_t r = uf.find(i);
      auto [it, fresh] = slot.try_emplace(r, out.size());
      if (fresh) {
        out.emplace_back();
        out.back().first_node = i;
      }
      auto& comp = out[it->second];
      ++comp.nodes;
      comp.touches_lo |= s == 0;
      comp.touches_top |= s == top;
    }
  }
  for (const auto& e : g.edges) {
    if (e.slice + 1 <= top) ++out[slot.at(uf.find(offset[e.slice] + e.a))].edges;
  }
  return out;
}

std::array<int, 3> count_events(const std::vector<BifurcationEvent>& events, std::size_t top) {
  std::array<int, 3> c{};
  for (const auto& ev : events) {
    if (ev.slice + 1 <= top) ++c[static_cast<std::size_t>(std::clamp(ev.index, 0, 2))];
  }
  return c;
}

std::vector<int> mus(const std::vector<GraphComponent>& comps) {
  std::vector<int> out;
  for (const auto& c : comps) out.push_back(c.mu());
  return out;
}

}  // namespace

InvariantTable invariant_table(const SliceGraph& graph, const std::vector<BifurcationEvent>& events) {
  InvariantTable table;
  const auto& sl = graph.slices;
  if (sl.empty()) return table;
  table.boundaries.push_back(sl.front().param);
  std::vector<std::size_t> cuts;  // region j ends with slice cuts[j]
  for (const auto& ev : events) {
    table.boundaries.push_back(ev.param);
    cuts.push_back(ev.slice);
  }
  table.boundaries.push_back(sl.back().param);
  cuts.push_back(sl.size() - 1);

  std::size_t first = 0;
  for (std::size_t j = 0; j < cuts.size(); ++j) {
    const std::size_t top = cuts[j];
    Region region;
    region.lo = table.boundaries[j];
    region.hi = table.boundaries[j + 1];
    const auto comps = components_up_to(graph, top);
    for (std::size_t i = 0; i < comps.size(); ++i) region.components.push_back({i, comps[i].mu()});
    region.c = count_events(events, top);
    region.l = static_cast<int>(sl.front().comps.size());
    region.k = static_cast<int>(sl[top].comps.size());
    for (const auto& ev : events) {
      if (ev.slice + 1 <= top && ev.degenerate) region.aborted = true;
    }
    if (region.aborted) {
      region.components.clear();
    } else {
      // a second sample inside the region must see the same surfaces
      if (top > first && mus(components_up_to(graph, first)) != mus(comps)) {
        throw InconsistentEuler("genus changes inside the region [" + std::to_string(region.lo) + ", " +
                                std::to_string(region.hi) + "]");
      }
      int euler = 0;
      for (const auto& rc : region.components) euler += 2 - 2 * rc.mu;
      const int lhs = region.c[0] - region.c[1] + region.c[2];
      if (lhs != euler - region.l - region.k) {
        throw InconsistentEuler("region [" + std::to_string(region.lo) + ", " + std::to_string(region.hi) +
                                "]: c0 - c1 + c2 = " + std::to_string(lhs) + " but sum(2 - 2 mu) - l - k = " +
                                std::to_string(euler - region.l - region.k));
      }
    }
    table.regions.push_back(std::move(region));
    first = top + 1;
  }
  return table;
}

MorseReport morse_report(const SliceGraph& graph, const std::vector<BifurcationEvent>& events) {
  MorseReport r;
  if (graph.slices.empty()) return r;
  const std::size_t top = graph.slices.size() - 1;
  const auto comps = components_up_to(graph, top);
  r.c = count_events(events, top);
  int mu_sum = 0;
  for (const auto& c : comps) {
    mu_sum += c.mu();
    if (!c.touches_lo) ++r.d0;
    if (!c.touches_top) ++r.d2;
    if (!c.touches_lo && !c.touches_top) ++r.r2;
  }
  r.r1 = static_cast<int>(comps.size());
  r.beta = {r.r1, 2 * mu_sum, r.r1};
  r.l = static_cast<int>(graph.slices.front().comps.size());
  r.k = static_cast<int>(graph.slices.back().comps.size());
  r.beta1_rel = r.beta[1] + r.k + r.l - r.r1 + r.r2;
  r.euler_ok = r.c[0] - r.c[1] + r.c[2] == r.beta[0] - r.beta[1] + r.beta[2] - r.l - r.k;
  r.inequalities_ok = r.c[2] >= r.beta[2] - r.k && r.c[1] >= r.beta[1] && r.c[0] >= r.beta[0] - r.l;
  r.relative_ok = r.c[2] >= r.d2 && r.c[0] >= r.d0 && r.c[1] >= r.beta1_rel - r.k - r.l + r.r1 - r.r2;
  r.pass = r.euler_ok && r.inequalities_ok && r.relative_ok;
  return r;
}

std::string scan_json(const ParamScan& cfg, const ScanResult& result, const InvariantTable& table,
                      const MorseReport& morse, const std::string& config_json) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["config"] = ordered_json::parse(config_json);
  j["axis"] = to_string(cfg.axis);
  j["range"] = {cfg.lo, cfg.hi};
  j["slices"] = result.graph.slices.size();
  ordered_json evs = ordered_json::array();
  for (const auto& ev : result.events) {
    evs.push_back({{"param", ev.param},
                   {"kind", to_string(ev.kind)},
                   {"index", ev.index},
                   {"x", ev.x},
                   {"sigma", ev.sigma},
                   {"residuals", ev.residuals},
                   {"tol_crit", ev.tol_crit},
                   {"located", ev.located},
                   {"degenerate", ev.degenerate}});
  }
  j["events"] = evs;
  j["flagged_slices"] = result.flagged_slices;
  ordered_json regions = ordered_json::array();
  for (const auto& rg : table.regions) {
    ordered_json comps = ordered_json::array();
    for (const auto& c : rg.components) comps.push_back({{"id", c.id}, {"mu", c.mu}});
    regions.push_back({{"lo", rg.lo},
                       {"hi", rg.hi},
                       {"aborted", rg.aborted},
                       {"components", comps},
                       {"c", rg.c},
                       {"l", rg.l},
                       {"k", rg.k}});
  }
  j["regions"] = regions;
  j["morse"] = {{"c", morse.c},
                {"beta", morse.beta},
                {"k", morse.k},
                {"l", morse.l},
                {"r1", morse.r1},
                {"r2", morse.r2},
                {"d0", morse.d0},
                {"d2", morse.d2},
                {"beta1_rel", morse.beta1_rel},
                {"euler_ok", morse.euler_ok},
                {"inequalities_ok", morse.inequalities_ok},
                {"relative_ok", morse.relative_ok},
                {"pass", morse.pass}};
  return j.dump(2) + "\n";
}

}  // namespace scalespace
