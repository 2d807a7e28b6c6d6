#include "scalespace/contours.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>

#include "scalespace/errors.hpp"
#include "scalespace/parallel.hpp"

namespace scalespace {

namespace {

enum class EndKind { Axis, Top, Side, Dead };

constexpr int kNone = -1;

struct Tracer {
  const FieldGrid& field;
  double c;
  double requested;  // the caller's level; Line needs it to be exactly 0
  double tau;
  std::size_t rows, n;
  std::vector<signed char> state;               // +1, -1, 0 (dead)
  std::vector<std::array<int, 2>> seg_at_edge;  // segments touching each edge node
  std::vector<std::array<std::size_t, 2>> segs;
  std::vector<GridCell> degenerate;

  Tracer(const FieldGrid& f, double level, double asked, double dead)
      : field(f), c(level), requested(asked), tau(dead), rows(f.rows()), n(f.n) {}

  std::size_t h_edge(std::size_t r, std::size_t i) const { return 2 * (r * n + i); }
  std::size_t v_edge(std::size_t r, std::size_t i) const { return 2 * (r * n + i) + 1; }

  void classify_nodes() {
    state.resize(rows * n);
    for (std::size_t j = 0; j < rows * n; ++j) {
      const double d = field.values[j] - c;
      state[j] = d > tau ? 1 : (d < -tau ? -1 : 0);
    }
    // an isolated dead node is pushed to the side its sign points to; only
    // nodes of an all-dead cell stay dead
    auto dead_cell = [&](std::size_t r, std::size_t i) {
      return state[r * n + i] == 0 && state[r * n + i + 1] == 0 && state[(r + 1) * n + i] == 0 &&
             state[(r + 1) * n + i + 1] == 0;
    };
    std::vector<signed char> resolved = state;
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t i = 0; i < n; ++i) {
        if (state[r * n + i] != 0) continue;
        bool area = false;
        for (std::size_t cr = r > 0 ? r - 1 : 0; cr <= r && cr + 1 < rows; ++cr) {
          for (std::size_t ci = i > 0 ? i - 1 : 0; ci <= i && ci + 1 < n; ++ci) area = area || dead_cell(cr, ci);
        }
        if (!area) resolved[r * n + i] = field.values[r * n + i] >= c ? 1 : -1;
      }
    }
    state = std::move(resolved);
  }

  void add_segment(std::size_t a, std::size_t b) {
    const int id = static_cast<int>(segs.size());
    segs.push_back({a, b});
    for (std::size_t e : {a, b}) {
      auto& slot = seg_at_edge[e];
      if (slot[0] == kNone) {
        slot[0] = id;
      } else {
        slot[1] = id;
      }
    }
  }

  void march() {
    seg_at_edge.assign(2 * rows * n, {kNone, kNone});
    for (std::size_t r = 0; r + 1 < rows; ++r) {
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const int sa = state[r * n + i], sb = state[r * n + i + 1];
        const int sd = state[(r + 1) * n + i], se = state[(r + 1) * n + i + 1];
        if (sa == 0 || sb == 0 || sd == 0 || se == 0) {
          const bool pos = sa > 0 || sb > 0 || sd > 0 || se > 0;
          const bool neg = sa < 0 || sb < 0 || sd < 0 || se < 0;
          if (pos && neg) degenerate.push_back({r, i});
          continue;
        }
        const std::size_t bottom = h_edge(r, i), top = h_edge(r + 1, i);
        const std::size_t left = v_edge(r, i), right = v_edge(r, i + 1);
        std::array<std::size_t, 4> hit{};
        int nhit = 0;
        if (sa != sb) hit[nhit++] = bottom;
        if (sb != se) hit[nhit++] = right;
        if (se != sd) hit[nhit++] = top;
        if (sd != sa) hit[nhit++] = left;
        if (nhit == 2) {
          add_segment(hit[0], hit[1]);
        } else if (nhit == 4) {
          const double centre = 0.25 * (field.at(r, i) + field.at(r, i + 1) + field.at(r + 1, i) +
                                        field.at(r + 1, i + 1)) - c;
          const int sc = centre > 0.0 ? 1 : -1;
          if (sc == sa) {
            add_segment(bottom, right);  // cut off b
            add_segment(left, top);      // cut off d
          } else {
            add_segment(bottom, left);   // cut off a
            add_segment(top, right);     // cut off e
          }
        }
      }
    }
  }

  ScalePoint point(std::size_t edge) const {
    const std::size_t node = edge / 2;
    const std::size_t r = node / n, i = node % n;
    const double v0 = field.values[node];
    if (edge % 2 == 0) {
      const double v1 = field.values[node + 1];
      const double t = (c - v0) / (v1 - v0);
      return {field.x(i) + t * field.dx, field.sigma[r]};
    }
    const double v1 = field.values[node + n];
    const double t = (c - v0) / (v1 - v0);
    return {field.x(i), field.sigma[r] + t * (field.sigma[r + 1] - field.sigma[r])};
  }

  EndKind end_kind(std::size_t edge) const {
    const std::size_t node = edge / 2;
    const std::size_t r = node / n, i = node % n;
    if (edge % 2 == 0) {
      if (r == 0) return EndKind::Axis;
      if (r + 1 == rows) return EndKind::Top;
      return EndKind::Dead;
    }
    if (i == 0 || i + 1 == n) return EndKind::Side;
    return EndKind::Dead;
  }

  // After a perturbation, an axis end whose two nodes do not straddle the
  // requested level crosses only the perturbed one, out in the numerically
  // zero tail of a transient signal.
  bool unresolved_axis(std::size_t edge) const {
    if (c == requested) return false;
    const std::size_t node = edge / 2;
    const double d0 = field.values[node] - requested, d1 = field.values[node + 1] - requested;
    return !((d0 > tau && d1 < -tau) || (d0 < -tau && d1 > tau));
  }

  int degree(std::size_t edge) const {
    return (seg_at_edge[edge][0] != kNone) + (seg_at_edge[edge][1] != kNone);
  }

  // Walks from `start` until the chain ends or closes; marks segments used.
  std::vector<std::size_t> walk(std::size_t start, std::vector<char>& used) const {
    std::vector<std::size_t> edges{start};
    std::size_t at = start;
    while (true) {
      int next = kNone;
      for (int s : seg_at_edge[at]) {
        if (s != kNone && !used[static_cast<std::size_t>(s)]) {
          next = s;
          break;
        }
      }
      if (next == kNone) break;
      used[static_cast<std::size_t>(next)] = 1;
      const auto& sg = segs[static_cast<std::size_t>(next)];
      at = sg[0] == at ? sg[1] : sg[0];
      edges.push_back(at);
      if (at == start) break;
    }
    return edges;
  }

  LevelCurve build(const std::vector<std::size_t>& edges, bool loop) const {
    LevelCurve curve;
    curve.closed_loop = loop;
    curve.vertices.reserve(edges.size());
    for (std::size_t e : edges) curve.vertices.push_back(point(e));
    if (loop) {
      curve.kind = CurveKind::TruncatedAtWindow;
      return curve;
    }
    const EndKind a = end_kind(edges.front()), b = end_kind(edges.back());
    auto ends_with = [&](EndKind k) { return static_cast<int>(a == k) + static_cast<int>(b == k); };
    for (std::size_t e : {edges.front(), edges.back()}) {
      if (end_kind(e) == EndKind::Axis) curve.axis_crossings.push_back(point(e).x);
    }
    std::sort(curve.axis_crossings.begin(), curve.axis_crossings.end());
    const bool unresolved = (a == EndKind::Axis && unresolved_axis(edges.front())) ||
                            (b == EndKind::Axis && unresolved_axis(edges.back()));
    if (ends_with(EndKind::Side) > 0 || ends_with(EndKind::Dead) > 0 || unresolved) {
      curve.kind = CurveKind::TruncatedAtWindow;
    } else if (ends_with(EndKind::Axis) == 2) {
      curve.kind = CurveKind::Closed;
    } else if (ends_with(EndKind::Axis) == 1 && requested == 0.0) {
      curve.kind = CurveKind::Line;
    } else {
      curve.kind = CurveKind::TruncatedAtWindow;
    }
    return curve;
  }

  std::vector<LevelCurve> chain() const {
    std::vector<LevelCurve> out;
    std::vector<char> used(segs.size(), 0);
    // open chains first, starting from the lower-id end; axis ends win
    std::vector<std::size_t> ends;
    for (std::size_t e = 0; e < seg_at_edge.size(); ++e) {
      if (seg_at_edge[e][0] != kNone && degree(e) == 1) ends.push_back(e);
    }
    std::stable_partition(ends.begin(), ends.end(),
                          [&](std::size_t e) { return end_kind(e) == EndKind::Axis; });
    for (std::size_t e : ends) {
      const int s = seg_at_edge[e][0];
      if (used[static_cast<std::size_t>(s)]) continue;
      out.push_back(build(walk(e, used), false));
    }
    for (std::size_t s = 0; s < segs.size(); ++s) {
      if (used[s]) continue;
      out.push_back(build(walk(std::min(segs[s][0], segs[s][1]), used), true));
    }
    return out;
  }
};

ContourSet trace(const FieldGrid& field, double c, double level, double tau) {
  Tracer tr(field, level, c, tau);
  tr.classify_nodes();
  tr.march();
  ContourSet set;
  set.c = c;
  set.c_used = level;
  set.k = field.k;
  set.degeneracy_flags = tr.degenerate;
  if (!tr.degenerate.empty()) return set;
  set.curves = tr.chain();
  auto key = [](const LevelCurve& cv) {
    double xmin = cv.vertices.front().x, smin = cv.vertices.front().sigma;
    for (const auto& v : cv.vertices) {
      if (v.x < xmin || (v.x == xmin && v.sigma < smin)) {
        xmin = v.x;
        smin = v.sigma;
      }
    }
    return std::make_pair(xmin, smin);
  };
  std::stable_sort(set.curves.begin(), set.curves.end(),
                   [&](const LevelCurve& a, const LevelCurve& b) { return key(a) < key(b); });
  return set;
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double row_scale(const FieldGrid& g, std::size_t r) {
  double m = 0.0;
  for (double v : g.row(r)) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

std::string to_string(CurveKind kind) {
  switch (kind) {
    case CurveKind::Closed: return "Closed";
    case CurveKind::Line: return "Line";
    case CurveKind::TruncatedAtWindow: return "TruncatedAtWindow";
  }
  return "?";
}

std::size_t ContourSet::count(CurveKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(curves.begin(), curves.end(), [&](const LevelCurve& cv) { return cv.kind == kind; }));
}

ContourSet extract_level_set(const FieldGrid& field, double c, const ExtractOptions& opt) {
  if (!std::isfinite(c)) throw ConfigError("contour level must be finite");
  if (field.rows() < 2 || field.n < 2) throw GridTooCoarse("contouring needs at least a 2 x 2 grid");
  const double scale = field.scale();
  const double tau = opt.dead_band * scale;
  ContourSet set = trace(field, c, c, tau);
  if (set.degeneracy_flags.empty()) return set;
  if (opt.retry) {
    const double shifted = c + opt.perturb * (scale > 0.0 ? scale : 1.0);
    ContourSet again = trace(field, c, shifted, tau);
    if (again.degeneracy_flags.empty()) return again;
    set = std::move(again);
  }
  const GridCell& cell = set.degeneracy_flags.front();
  throw DegenerateLevel("level " + fmt17(set.c_used) + " meets grid nodes next to a sign change (" +
                        std::to_string(set.degeneracy_flags.size()) + " cells, first at row " +
                        std::to_string(cell.row) + ", col " + std::to_string(cell.col) + ")");
}

Classification classify_component(const LevelCurve& curve, double c) {
  if (curve.closed_loop) {
    throw TopologyViolation("component with " + std::to_string(curve.vertices.size()) +
                            " vertices never reaches sigma = 0");
  }
  if (curve.kind == CurveKind::TruncatedAtWindow) {
    throw ConfigError("truncated components are not classified");
  }
  Classification out;
  out.kind = curve.kind;
  out.axis_crossings = curve.axis_crossings.size();
  for (const auto& v : {curve.vertices.front(), curve.vertices.back()}) {
    if (v.sigma == 0.0) out.mirror_residual = std::max(out.mirror_residual, std::abs(v.sigma));
  }
  if (curve.kind == CurveKind::Closed && out.axis_crossings != 2) {
    throw TopologyViolation("closed component with " + std::to_string(out.axis_crossings) +
                            " axis crossings");
  }
  if (curve.kind == CurveKind::Line) {
    if (c != 0.0) throw TopologyViolation("line component at nonzero level " + fmt17(c));
    if (out.axis_crossings != 1) {
      throw TopologyViolation("line component with " + std::to_string(out.axis_crossings) +
                              " axis crossings");
    }
  }
  return out;
}

FieldStack synth_stack(const SignalGrid& sig, const KernelParams& params, int k,
                       const std::vector<double>& sigma_grid) {
  const SmoothnessBudget budget = estimate_budget(sig, params.p);
  FieldStack st;
  if (k >= 1) st.lower = synth_field(sig, params, k - 1, sigma_grid, budget);
  st.f = synth_field(sig, params, k, sigma_grid, budget);
  st.fx = synth_field(sig, params, k + 1, sigma_grid, budget);
  st.fxx = synth_field(sig, params, k + 2, sigma_grid, budget);
  return st;
}

std::vector<GridCell> genericity_check(const FieldStack& stack, double c) {
  const FieldGrid& f = stack.f;
  const std::size_t rows = f.rows(), n = f.n;
  std::vector<double> sf(rows), sx(rows), ss(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    sf[r] = row_scale(f, r);
    sx[r] = row_scale(stack.fx, r);
    ss[r] = f.sigma[r] * row_scale(stack.fxx, r);
  }
  constexpr double kRel = 1e-6;
  // vanishes somewhere in the cell: sign change over the corners or a tiny corner
  auto vanishes = [](const std::array<double, 4>& v, double tol) {
    double lo = v[0], hi = v[0], small = std::abs(v[0]);
    for (double x : v) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
      small = std::min(small, std::abs(x));
    }
    return (lo <= 0.0 && hi >= 0.0) || small <= tol;
  };

  std::vector<char> flag((rows - 1) * (n - 1), 0);
  std::vector<double> resid((rows - 1) * (n - 1), 0.0);
  parallel_for(rows - 1, [&](std::size_t r) {
    const double tf = kRel * std::max(sf[r], sf[r + 1]);
    const double tx = kRel * std::max(sx[r], sx[r + 1]);
    const double ts = kRel * std::max(ss[r], ss[r + 1]);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      std::array<double, 4> a{f.at(r, i) - c, f.at(r, i + 1) - c, f.at(r + 1, i) - c, f.at(r + 1, i + 1) - c};
      std::array<double, 4> b{stack.fx.at(r, i), stack.fx.at(r, i + 1), stack.fx.at(r + 1, i),
                              stack.fx.at(r + 1, i + 1)};
      std::array<double, 4> s{stack.f_sigma(r, i), stack.f_sigma(r, i + 1), stack.f_sigma(r + 1, i),
                              stack.f_sigma(r + 1, i + 1)};
      if (vanishes(a, tf) && vanishes(b, tx) && vanishes(s, ts)) {
        const std::size_t id = r * (n - 1) + i;
        flag[id] = 1;
        auto mean_abs = [](const std::array<double, 4>& v, double sc) {
          const double m = std::abs(0.25 * (v[0] + v[1] + v[2] + v[3]));
          return sc > 0.0 ? m / sc : m;
        };
        resid[id] = mean_abs(a, std::max(sf[r], sf[r + 1])) + mean_abs(b, std::max(sx[r], sx[r + 1])) +
                    mean_abs(s, std::max(ss[r], ss[r + 1]));
      }
    }
  });

  // 8-connected clusters, one representative each
  std::vector<GridCell> out;
  std::vector<char> seen(flag.size(), 0);
  const std::size_t w = n - 1;
  for (std::size_t id = 0; id < flag.size(); ++id) {
    if (!flag[id] || seen[id]) continue;
    std::vector<std::size_t> stack_ids{id};
    seen[id] = 1;
    std::size_t best = id;
    while (!stack_ids.empty()) {
      const std::size_t cur = stack_ids.back();
      stack_ids.pop_back();
      if (resid[cur] < resid[best]) best = cur;
      const long cr = static_cast<long>(cur / w), ci = static_cast<long>(cur % w);
      for (long dr = -1; dr <= 1; ++dr) {
        for (long di = -1; di <= 1; ++di) {
          const long nr = cr + dr, ni = ci + di;
          if (nr < 0 || ni < 0 || nr >= static_cast<long>(rows - 1) || ni >= static_cast<long>(w)) continue;
          const std::size_t nb = static_cast<std::size_t>(nr) * w + static_cast<std::size_t>(ni);
          if (flag[nb] && !seen[nb]) {
            seen[nb] = 1;
            stack_ids.push_back(nb);
          }
        }
      }
    }
    out.push_back({best / w, best % w});
  }
  return out;
}

std::vector<EnergySample> orient_and_energy(LevelCurve& curve, const FieldEvaluator& eval, int k,
                                            double c) {
  if (k < 1) throw ConfigError("energy needs k >= 1 so that the (k-1)-field exists");
  auto& vs = curve.vertices;
  if (vs.size() < 2) return {};

  // Newton along the gradient onto the exact level set
  for (auto& v : vs) {
    const bool on_axis = v.sigma == 0.0;
    for (int it = 0; it < 8; ++it) {
      const double f = eval.eval(v.x, v.sigma, k) - c;
      const double fx = eval.eval(v.x, v.sigma, k + 1);
      const double fs = on_axis ? 0.0 : eval.eval(v.x, v.sigma, k, 1);
      const double g2 = fx * fx + fs * fs;
      if (g2 == 0.0) break;
      const double dx = f * fx / g2, ds = f * fs / g2;
      v.x -= dx;
      v.sigma = std::max(0.0, v.sigma - ds);
      if (std::abs(dx) + std::abs(ds) < 1e-14 * (1.0 + std::abs(v.x) + v.sigma)) break;
    }
  }

  std::vector<std::array<double, 2>> field_v(vs.size());
  for (std::size_t j = 0; j < vs.size(); ++j) {
    const double fs = vs[j].sigma == 0.0 ? 0.0 : eval.eval(vs[j].x, vs[j].sigma, k, 1);
    field_v[j] = {-fs, eval.eval(vs[j].x, vs[j].sigma, k + 1)};
  }
  std::size_t fwd = 0, back = 0;
  for (std::size_t j = 0; j + 1 < vs.size(); ++j) {
    const double tx = vs[j + 1].x - vs[j].x, ts = vs[j + 1].sigma - vs[j].sigma;
    const double dot = tx * (field_v[j][0] + field_v[j + 1][0]) + ts * (field_v[j][1] + field_v[j + 1][1]);
    if (dot > 0.0) ++fwd;
    if (dot < 0.0) ++back;
  }
  const std::size_t segments = vs.size() - 1;
  if (20 * std::min(fwd, back) > segments) {
    throw OrientationAmbiguous(std::to_string(std::min(fwd, back)) + " of " + std::to_string(segments) +
                               " segments run against the majority direction");
  }
  if (back > fwd) std::reverse(vs.begin(), vs.end());
  curve.orientation = 1;

  std::vector<EnergySample> out(vs.size());
  for (std::size_t j = 0; j < vs.size(); ++j) {
    const double lower = eval.eval(vs[j].x, vs[j].sigma, k - 1);
    const double fk = eval.eval(vs[j].x, vs[j].sigma, k);
    out[j] = {j, vs[j].x, vs[j].sigma, lower - vs[j].x * fk};
  }
  return out;
}

std::string contours_csv(const ContourSet& set) {
  std::string out = "component_id,kind,t_index,x,sigma\n";
  for (std::size_t id = 0; id < set.curves.size(); ++id) {
    const auto& cv = set.curves[id];
    const std::string kind = to_string(cv.kind);
    for (std::size_t t = 0; t < cv.vertices.size(); ++t) {
      out += std::to_string(id) + "," + kind + "," + std::to_string(t) + "," + fmt17(cv.vertices[t].x) + "," +
             fmt17(cv.vertices[t].sigma) + "\n";
    }
  }
  return out;
}

}  // namespace scalespace
