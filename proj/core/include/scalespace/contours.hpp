#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "scalespace/spectral.hpp"

namespace scalespace {

struct ScalePoint {
  double x = 0.0;
  double sigma = 0.0;
};

enum class CurveKind { Closed, Line, TruncatedAtWindow };

std::string to_string(CurveKind kind);

/// One connected piece of {d^k Psi / dx^k = c}, stored on sigma >= 0. The
/// sigma < 0 half is the mirror image.
struct LevelCurve {
  std::vector<ScalePoint> vertices;
  CurveKind kind = CurveKind::TruncatedAtWindow;
  std::vector<double> axis_crossings;  // ascending
  /// +1 once oriented along the tracing field, 0 before.
  int orientation = 0;
  bool closed_loop = false;  // no endpoints at all: an island off the axis
};

struct GridCell {
  std::size_t row = 0;
  std::size_t col = 0;
  bool operator==(const GridCell&) const = default;
};

struct ContourSet {
  double c = 0.0;          // level requested
  double c_used = 0.0;     // level traced, after a degeneracy perturbation
  int k = 0;
  std::vector<LevelCurve> curves;
  std::vector<GridCell> degeneracy_flags;

  std::size_t count(CurveKind kind) const;
};

struct ExtractOptions {
  /// Node values within dead_band * scale of c are numerically equal to c.
  /// Where such nodes cover a whole cell, cells touching them carry no
  /// segment; an isolated one counts on the side of its sign.
  double dead_band = 1e-12;
  /// On DegenerateLevel, shift c by perturb * scale and try once more.
  bool retry = true;
  double perturb = 1e-9;
};

/// Marching squares on the sigma >= 0 half-grid. Saddle cells are split by
/// the sign of the cell-centre mean. Throws DegenerateLevel when a dead cell
/// borders both signs and the retry (if enabled) also fails.
ContourSet extract_level_set(const FieldGrid& field, double c, const ExtractOptions& opt = {});

struct Classification {
  CurveKind kind = CurveKind::TruncatedAtWindow;
  std::size_t axis_crossings = 0;
  double mirror_residual = 0.0;
};

/// Checks a non-truncated curve against its kind: 2 axis
/// crossings for Closed, 1 for Line (c = 0 only). TopologyViolation otherwise.
Classification classify_component(const LevelCurve& curve, double c);

/// d^(k-1), d^k, d^(k+1), d^(k+2) x-derivative fields on one ladder. The
/// sigma-derivative of the k-field is sigma times the (k+2)-field.
struct FieldStack {
  std::optional<FieldGrid> lower;  // k - 1, present when k >= 1
  FieldGrid f;                     // k
  FieldGrid fx;                    // k + 1
  FieldGrid fxx;                   // k + 2

  int k() const { return f.k; }
  double f_sigma(std::size_t row, std::size_t col) const { return f.sigma[row] * fxx.at(row, col); }
};

FieldStack synth_stack(const SignalGrid& sig, const KernelParams& params, int k,
                       const std::vector<double>& sigma_grid);

/// Cells where d^k Psi - c, d^(k+1) Psi and d^k d_sigma Psi all vanish inside
/// the cell (sign change, or a corner within 1e-6 of the row scale). Adjacent
/// flagged cells are merged; the cell with the smallest residual represents
/// each cluster.
std::vector<GridCell> genericity_check(const FieldStack& stack, double c);

struct EnergySample {
  std::size_t t = 0;
  double x = 0.0;
  double sigma = 0.0;
  double energy = 0.0;
};

/// Projects the curve's vertices onto the exact level set, orients it along
/// V = (-d^k d_sigma Psi, d^(k+1) Psi) and samples
/// L = d^(k-1) Psi - x d^k Psi in that order. Along V, dL/dt = sigma (d^(k+1) Psi)^2.
/// Throws OrientationAmbiguous when more than 5% of the segments disagree
/// with the majority direction, ConfigError when k < 1.
std::vector<EnergySample> orient_and_energy(LevelCurve& curve, const FieldEvaluator& eval, int k,
                                            double c);

/// CSV rows component_id,kind,t_index,x,sigma with 17 significant digits.
std::string contours_csv(const ContourSet& set);

}  // namespace scalespace
