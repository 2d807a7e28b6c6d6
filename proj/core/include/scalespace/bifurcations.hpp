#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "scalespace/contours.hpp"

namespace scalespace {

enum class ScanAxis { P, C };
enum class EventKind { Birth, Death, Merge, Split };

std::string to_string(ScanAxis axis);
std::string to_string(EventKind kind);
/// Morse index implied by the kind: Birth 0, Merge/Split 1, Death 2.
int expected_index(EventKind kind);

struct ParamScan {
  ScanAxis axis = ScanAxis::P;
  double alpha = 0.0;
  double beta = 1.0;
  int k = 1;
  double c = 0.0;  // level, for P scans
  double p = 0.0;  // order, for C scans
  double lo = 0.0;
  double hi = 1.0;
  std::size_t n_slices = 32;
  double tol_param = 1e-4;
  std::vector<double> sigma_grid;
  /// C scans keep |c| >= c_min_rel * max|Psi| since events pile up at 0.
  double c_min_rel = 1e-3;

  /// ConfigError on an empty range, too few slices, tol <= 0, a missing
  /// ladder, or a C range that straddles the excluded band around 0.
  void validate() const;
  KernelParams params_at(double value) const;
  double level_at(double value) const;
};

/// A tracked closed contour in one slice.
struct SliceComponent {
  double x_left = 0.0;
  double x_right = 0.0;
  int depth = 0;  // number of same-slice components whose extent contains this one
  std::vector<ScalePoint> vertices;
};

struct Slice {
  double param = 0.0;
  double scale = 0.0;  // max |d^k Psi| of the slice field
  std::vector<SliceComponent> comps;
};

struct SliceEdge {
  std::size_t slice = 0;  // edge joins (slice, a) to (slice + 1, b)
  std::size_t a = 0;
  std::size_t b = 0;
};

/// Reeb-style tracking graph: slices in ascending parameter order, edges only
/// between neighbouring slices.
struct SliceGraph {
  std::vector<Slice> slices;
  std::vector<SliceEdge> edges;

  /// Rebuilds `edges` by extent overlap between neighbouring slices; only
  /// components at equal nesting depth are joined.
  void match(double tol);
};

struct BifurcationEvent {
  double param = 0.0;
  EventKind kind = EventKind::Death;
  int index = 2;
  double x = 0.0;
  double sigma = 0.0;
  /// d^(k+1) Psi and d^k d_sigma Psi at (x, sigma, param); then d^k Psi - c.
  std::array<double, 3> residuals{};
  double tol_crit = 0.0;
  std::size_t slice = 0;  // the change happens between slice and slice + 1
  bool located = false;
  bool degenerate = false;  // Hessian index disagreed with the kind
};

struct ScanResult {
  SliceGraph graph;
  std::vector<BifurcationEvent> events;
  std::vector<std::size_t> flagged_slices;
};

/// Slices the parameter range, tracks closed contours between slices,
/// bisects every topology change down to tol_param and validates each event
/// as a critical point. BudgetExceeded when the spectrum's decay order does
/// not exceed p_hi + 1 + k; UnresolvedEvent when two changes cannot be
/// separated within tol_param.
ScanResult scan(const SignalGrid& sig, const ParamScan& cfg);

struct LocateOptions {
  int max_iter = 50;
  /// Absolute residual target for d^(k+1) Psi and d^k d_sigma Psi.
  double tol = 1e-10;
  /// A root further than this from the seed is rejected.
  double max_radius = 1.0;
};

struct CriticalPoint {
  double x = 0.0;
  double sigma = 0.0;
  double fx = 0.0;      // d^(k+1) Psi
  double fsigma = 0.0;  // d^k d_sigma Psi
  int iterations = 0;
};

/// Damped Newton on (d^(k+1) Psi, d^k d_sigma Psi) = 0 in (x, sigma >= 0).
/// NoConvergence after max_iter steps or on leaving max_radius.
CriticalPoint locate_critical_point(const FieldEvaluator& eval, int k, ScalePoint seed,
                                    const LocateOptions& opt = {});

/// Morse index of the scan parameter as a height function on the level
/// surface, from the 2 x 2 Hessian at the located point. Returns the
/// kind-based index; IndexMismatch if the Hessian disagrees and resolves.
int classify_index(const BifurcationEvent& event, const SignalGrid& sig, const ParamScan& cfg);

struct RegionComponent {
  std::size_t id = 0;
  int mu = 0;
};

struct Region {
  double lo = 0.0;
  double hi = 0.0;
  bool aborted = false;  // holds a degenerate event
  std::vector<RegionComponent> components;
  std::array<int, 3> c{};  // critical points of index 0, 1, 2 up to hi
  int l = 0;               // closed contours at the range start
  int k = 0;               // closed contours at the region top
};

struct InvariantTable {
  std::vector<double> boundaries;
  std::vector<Region> regions;
};

/// Per region between bifurcation parameters: each connected piece of the
/// tracking graph up to the region is one capped surface, and mu is its cycle
/// rank. InconsistentEuler when c0 - c1 + c2 != sum(2 - 2 mu) - l - k.
InvariantTable invariant_table(const SliceGraph& graph, const std::vector<BifurcationEvent>& events);

struct MorseReport {
  std::array<int, 3> c{};
  std::array<int, 3> beta{};
  int k = 0;
  int l = 0;
  int r1 = 0;
  int r2 = 0;
  int d0 = 0;
  int d2 = 0;
  int beta1_rel = 0;  // beta_1(M, dM)
  bool euler_ok = false;
  bool inequalities_ok = false;
  bool relative_ok = false;
  bool pass = false;
};

/// Morse inequalities and the Euler identity over the full scanned range.
MorseReport morse_report(const SliceGraph& graph, const std::vector<BifurcationEvent>& events);

/// {axis, range, events, regions, morse}, plus whatever `config` holds under
/// "config".
std::string scan_json(const ParamScan& cfg, const ScanResult& result, const InvariantTable& table,
                      const MorseReport& morse, const std::string& config_json = "{}");

}  // namespace scalespace
