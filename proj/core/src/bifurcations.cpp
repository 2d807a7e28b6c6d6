#include "scalespace/bifurcations.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "scalespace/errors.hpp"
#include "scalespace/parallel.hpp"

namespace scalespace {

namespace {

enum class ChangeType { Identity, Elementary, Complex };

struct Change {
  ChangeType type = ChangeType::Identity;
  EventKind kind = EventKind::Death;
  std::vector<std::size_t> left;   // components involved on the lower slice
  std::vector<std::size_t> right;  // and on the upper slice
};

bool extents_meet(const SliceComponent& a, const SliceComponent& b, double tol) {
  return a.depth == b.depth && a.x_left <= b.x_right + tol && b.x_left <= a.x_right + tol;
}

Change diff(const Slice& a, const Slice& b, double tol) {
  const std::size_t na = a.comps.size(), nb = b.comps.size();
  std::vector<std::vector<std::size_t>> adj_a(na), adj_b(nb);
  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t j = 0; j < nb; ++j) {
      if (extents_meet(a.comps[i], b.comps[j], tol)) {
        adj_a[i].push_back(j);
        adj_b[j].push_back(i);
      }
    }
  }
  Change ch;
  std::vector<std::size_t> odd_a, odd_b;
  for (std::size_t i = 0; i < na; ++i) {
    if (adj_a[i].size() != 1) odd_a.push_back(i);
  }
  for (std::size_t j = 0; j < nb; ++j) {
    if (adj_b[j].size() != 1) odd_b.push_back(j);
  }
  // a 1-1 pair elsewhere must also be mutual
  auto rest_is_matching = [&](const std::vector<std::size_t>& skip_a, const std::vector<std::size_t>& skip_b) {
    for (std::size_t i = 0; i < na; ++i) {
      if (std::find(skip_a.begin(), skip_a.end(), i) != skip_a.end()) continue;
      if (adj_a[i].size() != 1) return false;
      const std::size_t j = adj_a[i][0];
      if (std::find(skip_b.begin(), skip_b.end(), j) != skip_b.end()) return false;
      if (adj_b[j].size() != 1) return false;
    }
    return true;
  };

  if (odd_a.empty() && odd_b.empty() && rest_is_matching({}, {})) return ch;

  ch.type = ChangeType::Complex;
  if (odd_a.size() == 1 && odd_b.empty() && adj_a[odd_a[0]].empty() && rest_is_matching(odd_a, {})) {
    ch = {ChangeType::Elementary, EventKind::Death, odd_a, {}};
  } else if (odd_b.size() == 1 && odd_a.empty() && adj_b[odd_b[0]].empty() && rest_is_matching({}, odd_b)) {
    ch = {ChangeType::Elementary, EventKind::Birth, {}, odd_b};
  } else if (odd_a.size() == 1 && odd_b.empty() && adj_a[odd_a[0]].size() == 2) {
    const auto& pair = adj_a[odd_a[0]];
    if (rest_is_matching(odd_a, pair)) ch = {ChangeType::Elementary, EventKind::Split, odd_a, pair};
  } else if (odd_b.size() == 1 && odd_a.empty() && adj_b[odd_b[0]].size() == 2) {
    const auto& pair = adj_b[odd_b[0]];
    if (rest_is_matching(pair, odd_b)) ch = {ChangeType::Elementary, EventKind::Merge, pair, odd_b};
  }
  return ch;
}

Slice make_slice(const SignalGrid& sig, const ParamScan& cfg, double value) {
  const KernelParams params = cfg.params_at(value);
  const FieldGrid field = synth_field(sig, params, cfg.k, cfg.sigma_grid);
  const ContourSet set = extract_level_set(field, cfg.level_at(value));
  Slice s;
  s.param = value;
  s.scale = field.scale();
  for (const auto& cv : set.curves) {
    if (cv.kind != CurveKind::Closed) continue;
    SliceComponent comp;
    comp.x_left = comp.x_right = cv.vertices.front().x;
    for (const auto& v : cv.vertices) {
      comp.x_left = std::min(comp.x_left, v.x);
      comp.x_right = std::max(comp.x_right, v.x);
    }
    comp.vertices = cv.vertices;
    s.comps.push_back(std::move(comp));
  }
  for (auto& a : s.comps) {
    for (const auto& b : s.comps) {
      if (&a != &b && b.x_left < a.x_left && a.x_right < b.x_right) ++a.depth;
    }
  }
  return s;
}

ScalePoint event_seed(const Slice& a, const Slice& b, const Change& ch) {
  if (ch.kind == EventKind::Death || ch.kind == EventKind::Birth) {
    const SliceComponent& comp = ch.kind == EventKind::Death ? a.comps[ch.left[0]] : b.comps[ch.right[0]];
    return {0.5 * (comp.x_left + comp.x_right), 0.0};
  }
  const Slice& two = ch.kind == EventKind::Split ? b : a;
  const auto& ids = ch.kind == EventKind::Split ? ch.right : ch.left;
  const auto& p = two.comps[ids[0]].vertices;
  const auto& q = two.comps[ids[1]].vertices;
  double best = std::numeric_limits<double>::infinity();
  ScalePoint seed;
  for (const auto& u : p) {
    for (const auto& v : q) {
      const double d = (u.x - v.x) * (u.x - v.x) + (u.sigma - v.sigma) * (u.sigma - v.sigma);
      if (d < best) {
        best = d;
        seed = {0.5 * (u.x + v.x), 0.5 * (u.sigma + v.sigma)};
      }
    }
  }
  return seed;
}

struct Derivs {
  double f, fx, fs, fxx, fxs, fss, fp, fxp, fsp;
};

Derivs derivs(const SignalGrid& sig, const ParamScan& cfg, double x, double sigma, double value) {
  const FieldEvaluator ev(sig, cfg.params_at(value));
  const int k = cfg.k;
  Derivs d{};
  d.f = ev.eval(x, sigma, k) - cfg.level_at(value);
  d.fx = ev.eval(x, sigma, k + 1);
  d.fs = ev.eval(x, sigma, k, 1);
  d.fxx = ev.eval(x, sigma, k + 2);
  d.fxs = ev.eval(x, sigma, k + 1, 1);
  d.fss = ev.eval(x, sigma, k, 2);
  if (cfg.axis == ScanAxis::P) {
    d.fp = ev.eval(x, sigma, k, 0, 1);
    d.fxp = ev.eval(x, sigma, k + 1, 0, 1);
    d.fsp = ev.eval(x, sigma, k, 1, 1);
  } else {
    d.fp = -1.0;
  }
  return d;
}

// Solves the 3 x 3 system m * s = r by Cramer's rule; false when singular.
bool solve3(const std::array<std::array<double, 3>, 3>& m, const std::array<double, 3>& r,
            std::array<double, 3>& s) {
  auto det = [](const std::array<std::array<double, 3>, 3>& a) {
    return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
           a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  };
  const double d = det(m);
  if (d == 0.0 || !std::isfinite(d)) return false;
  for (int c = 0; c < 3; ++c) {
    auto mc = m;
    for (int row = 0; row < 3; ++row) mc[row][c] = r[row];
    s[c] = det(mc) / d;
  }
  return true;
}

// Newton on (f - level, fx, fs) in (x, sigma, param).
bool polish(const SignalGrid& sig, const ParamScan& cfg, double& x, double& sigma, double& value, double lo,
            double hi, double scale) {
  double px = x, ps = sigma, pv = value;
  for (int it = 0; it < 30; ++it) {
    const Derivs d = derivs(sig, cfg, px, ps, pv);
    std::array<std::array<double, 3>, 3> jac{{{d.fx, d.fs, d.fp}, {d.fxx, d.fxs, d.fxp}, {d.fxs, d.fss, d.fsp}}};
    std::array<double, 3> step{};
    if (!solve3(jac, {-d.f, -d.fx, -d.fs}, step)) return false;
    px += step[0];
    ps = std::max(0.0, ps + step[1]);
    pv += step[2];
    if (!std::isfinite(px) || !std::isfinite(pv) || pv < lo || pv > hi) return false;
    const double rel = std::abs(step[0]) + std::abs(step[1]) + std::abs(step[2]);
    if (rel < 1e-13 * (1.0 + std::abs(px) + ps + std::abs(pv))) {
      const Derivs e = derivs(sig, cfg, px, ps, pv);
      if (std::abs(e.f) > 1e-9 * scale || std::abs(e.fx) > 1e-9 * scale || std::abs(e.fs) > 1e-9 * scale) {
        return false;
      }
      x = px;
      sigma = ps;
      value = pv;
      return true;
    }
  }
  return false;
}

}  // namespace

std::string to_string(ScanAxis axis) { return axis == ScanAxis::P ? "p" : "c"; }

std::string to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Birth: return "Birth";
    case EventKind::Death: return "Death";
    case EventKind::Merge: return "Merge";
    case EventKind::Split: return "Split";
  }
  return "?";
}

int expected_index(EventKind kind) {
  switch (kind) {
    case EventKind::Birth: return 0;
    case EventKind::Death: return 2;
    default: return 1;
  }
}

void ParamScan::validate() const {
  if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi) throw ConfigError("scan range is empty");
  if (n_slices < 8) throw ConfigError("scan needs at least 8 slices");
  if (!(tol_param > 0.0)) throw ConfigError("tol_param must be positive");
  if (k < 0) throw ConfigError("derivative order k must be non-negative");
  if (sigma_grid.size() < 2) throw ConfigError("scan needs a sigma ladder with at least 2 rows");
  if (axis == ScanAxis::P) {
    params_at(lo).validate();
    if (!std::isfinite(c)) throw ConfigError("scan level must be finite");
  } else {
    params_at(p).validate();
    if (lo <= 0.0 && hi >= 0.0) throw ConfigError("c scans must stay on one side of 0");
  }
}

KernelParams ParamScan::params_at(double value) const {
  return {alpha, beta, axis == ScanAxis::P ? value : p};
}

double ParamScan::level_at(double value) const { return axis == ScanAxis::C ? value : c; }

void SliceGraph::match(double tol) {
  edges.clear();
  for (std::size_t s = 0; s + 1 < slices.size(); ++s) {
    for (std::size_t a = 0; a < slices[s].comps.size(); ++a) {
      for (std::size_t b = 0; b < slices[s + 1].comps.size(); ++b) {
        if (extents_meet(slices[s].comps[a], slices[s + 1].comps[b], tol)) edges.push_back({s, a, b});
      }
    }
  }
}

CriticalPoint locate_critical_point(const FieldEvaluator& eval, int k, ScalePoint seed, const LocateOptions& opt) {
  double x = seed.x, s = std::max(0.0, seed.sigma);
  auto residual = [&](double px, double ps, double& fx, double& fs) {
    fx = eval.eval(px, ps, k + 1);
    fs = ps == 0.0 ? 0.0 : eval.eval(px, ps, k, 1);
    return std::hypot(fx, fs);
  };
  double fx = 0.0, fs = 0.0;
  double norm = residual(x, s, fx, fs);
  for (int it = 0; it < opt.max_iter; ++it) {
    if (std::abs(fx) <= opt.tol && std::abs(fs) <= opt.tol) return {x, s, fx, fs, it};
    const double a = eval.eval(x, s, k + 2);
    const double b = eval.eval(x, s, k + 1, 1);
    const double d = eval.eval(x, s, k, 2);
    const double det = a * d - b * b;
    if (det == 0.0 || !std::isfinite(det)) break;
    const double dx = -(d * fx - b * fs) / det;
    const double ds = -(a * fs - b * fx) / det;
    double lambda = 1.0;
    bool moved = false;
    for (int half = 0; half < 12; ++half, lambda *= 0.5) {
      const double nx = x + lambda * dx, ns = std::max(0.0, s + lambda * ds);
      double nfx = 0.0, nfs = 0.0;
      const double nn = residual(nx, ns, nfx, nfs);
      if (nn < norm || half == 11) {
        x = nx;
        s = ns;
        fx = nfx;
        fs = nfs;
        norm = nn;
        moved = true;
        break;
      }
    }
    if (!moved || std::hypot(x - seed.x, s - seed.sigma) > opt.max_radius) break;
  }
  if (std::abs(fx) <= opt.tol && std::abs(fs) <= opt.tol && std::hypot(x - seed.x, s - seed.sigma) <= opt.max_radius) {
    return {x, s, fx, fs, opt.max_iter};
  }
  throw NoConvergence("no critical point within " + std::to_string(opt.max_radius) + " of seed (" +
                      std::to_string(seed.x) + ", " + std::to_string(seed.sigma) + ")");
}

int classify_index(const BifurcationEvent& event, const SignalGrid& sig, const ParamScan& cfg) {
  const int expected = expected_index(event.kind);
  const Derivs d = derivs(sig, cfg, event.x, event.sigma, event.param);
  // height h(x, sigma) solving F(x, sigma, h) = level has Hessian -H_F / F_h
  const double scale = std::max({std::abs(d.fxx), std::abs(d.fxs), std::abs(d.fss)});
  if (scale == 0.0 || std::abs(d.fp) < 1e-12 * scale) return expected;
  const double h11 = -d.fxx / d.fp, h12 = -d.fxs / d.fp, h22 = -d.fss / d.fp;
  const double tr = h11 + h22, det = h11 * h22 - h12 * h12;
  const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
  const double e1 = 0.5 * tr - disc, e2 = 0.5 * tr + disc;
  const double resolve = 1e-8 * (std::abs(e1) + std::abs(e2));
  if (std::abs(e1) <= resolve || std::abs(e2) <= resolve) return expected;
  const int hessian = (e1 < 0.0) + (e2 < 0.0);
  if (hessian != expected) {
    throw IndexMismatch(to_string(event.kind) + " at param " + std::to_string(event.param) + " has Hessian index " +
                        std::to_string(hessian) + ", expected " + std::to_string(expected));
  }
  return expected;
}

ScanResult scan(const SignalGrid& sig, const ParamScan& cfg) {
  cfg.validate();
  sig.validate();
  ScanResult out;
  const double p_hi = cfg.axis == ScanAxis::P ? cfg.hi : cfg.p;
  const double m = estimate_decay_order(forward_transform(sig));
  if (!(m > p_hi + 1.0 + cfg.k)) {
    throw BudgetExceeded("spectral decay order m = " + std::to_string(m) + " <= p_hi + 1 + k = " +
                         std::to_string(p_hi + 1.0 + cfg.k));
  }
  const double tol_x = 2.0 * sig.dx;

  std::vector<double> values;
  if (cfg.lo == cfg.hi) {
    values.push_back(cfg.lo);
  } else {
    for (std::size_t j = 0; j < cfg.n_slices; ++j) {
      values.push_back(cfg.lo + (cfg.hi - cfg.lo) * static_cast<double>(j) / static_cast<double>(cfg.n_slices - 1));
    }
  }
  std::vector<Slice> slices(values.size());
  parallel_for(values.size(), [&](std::size_t j) { slices[j] = make_slice(sig, cfg, values[j]); });

  // bisect every changing interval until each holds one change narrower than tol
  std::vector<Slice> extra;
  std::vector<std::pair<Slice, Slice>> work;
  for (std::size_t j = 0; j + 1 < slices.size(); ++j) work.emplace_back(slices[j], slices[j + 1]);
  while (!work.empty()) {
    auto [a, b] = std::move(work.back());
    work.pop_back();
    const Change ch = diff(a, b, tol_x);
    if (ch.type == ChangeType::Identity) continue;
    if (b.param - a.param <= cfg.tol_param) {
      if (ch.type == ChangeType::Complex) {
        throw UnresolvedEvent("changes between " + std::to_string(a.param) + " and " + std::to_string(b.param) +
                              " could not be separated; try n_slices = " + std::to_string(2 * cfg.n_slices));
      }
      continue;
    }
    Slice mid = make_slice(sig, cfg, 0.5 * (a.param + b.param));
    extra.push_back(mid);
    work.emplace_back(mid, std::move(b));
    work.emplace_back(std::move(a), std::move(mid));
  }
  for (auto& s : extra) slices.push_back(std::move(s));
  std::sort(slices.begin(), slices.end(), [](const Slice& a, const Slice& b) { return a.param < b.param; });
  out.graph.slices = std::move(slices);
  out.graph.match(tol_x);

  const auto& sl = out.graph.slices;
  for (std::size_t s = 0; s + 1 < sl.size(); ++s) {
    const Change ch = diff(sl[s], sl[s + 1], tol_x);
    if (ch.type == ChangeType::Identity) continue;
    BifurcationEvent ev;
    ev.kind = ch.kind;
    ev.index = expected_index(ch.kind);
    ev.slice = s;
    ev.param = 0.5 * (sl[s].param + sl[s + 1].param);
    const ScalePoint seed = event_seed(sl[s], sl[s + 1], ch);
    ev.x = seed.x;
    ev.sigma = seed.sigma;
    const double scale = std::max(sl[s].scale, sl[s + 1].scale);
    ev.tol_crit = 1e-6 * scale;
    try {
      const FieldEvaluator eval(sig, cfg.params_at(ev.param));
      LocateOptions opt;
      opt.tol = 1e-3 * ev.tol_crit;
      const CriticalPoint cp = locate_critical_point(eval, cfg.k, seed, opt);
      ev.x = cp.x;
      ev.sigma = cp.sigma;
      double x = cp.x, sg = cp.sigma, v = ev.param;
      if (polish(sig, cfg, x, sg, v, sl[s].param - cfg.tol_param, sl[s + 1].param + cfg.tol_param, scale)) {
        ev.x = x;
        ev.sigma = sg;
        ev.param = v;
      }
      const Derivs d = derivs(sig, cfg, ev.x, ev.sigma, ev.param);
      ev.residuals = {d.fx, d.fs, d.f};
      ev.located = std::abs(d.fx) < ev.tol_crit && std::abs(d.fs) < ev.tol_crit;
    } catch (const NoConvergence&) {
      ev.located = false;
    }
    if (!ev.located) {
      out.flagged_slices.push_back(s);
    } else {
      try {
        ev.index = classify_index(ev, sig, cfg);
      } catch (const IndexMismatch&) {
        ev.degenerate = true;
      }
    }
    out.events.push_back(ev);
  }

  // every change in the raw counts must be accounted for by the events
  for (std::size_t s = 0; s + 1 < sl.size(); ++s) {
    long delta = static_cast<long>(sl[s + 1].comps.size()) - static_cast<long>(sl[s].comps.size());
    for (const auto& ev : out.events) {
      if (ev.slice != s) continue;
      delta -= (ev.kind == EventKind::Birth || ev.kind == EventKind::Split) ? 1 : -1;
    }
    if (delta != 0) {
      throw InconsistentEuler("component count between params " + std::to_string(sl[s].param) + " and " +
                              std::to_string(sl[s + 1].param) + " is not explained by the events");
    }
  }
  return out;
}

}  // namespace scalespace
