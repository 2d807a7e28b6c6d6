#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "scalespace/kernels.hpp"

namespace scalespace {

/// Uniformly sampled real signal. Sample i sits at x0 + i * dx.
struct SignalGrid {
  double x0 = 0.0;
  double dx = 1.0;
  std::vector<double> samples;

  std::size_t size() const { return samples.size(); }
  double x(std::size_t i) const { return x0 + static_cast<double>(i) * dx; }
  double length() const { return static_cast<double>(samples.size()) * dx; }
  double scale() const;

  /// Throws ConfigError unless N >= 16 is a power of two, dx > 0, and every
  /// sample is finite.
  void validate() const;
};

/// Continuous-transform approximation F(w_m), m in [-N/2, N/2), stored in
/// ascending frequency order: coeffs[j] belongs to m = j - N/2.
struct Spectrum {
  double x0 = 0.0;
  double domega = 1.0;
  std::vector<std::complex<double>> coeffs;

  std::size_t size() const { return coeffs.size(); }
  double omega(std::size_t j) const {
    return (static_cast<double>(j) - static_cast<double>(coeffs.size() / 2)) * domega;
  }
  double dx() const;
};

Spectrum forward_transform(const SignalGrid& sig);
SignalGrid inverse_transform(const Spectrum& spec);
/// Full complex inverse; the imaginary part is what inverse_transform drops.
std::vector<std::complex<double>> inverse_transform_complex(const Spectrum& spec);

/// Effective decay order m of |F(w)| ~ |w|^-m, fit on the top octave of the
/// band where |F| clears 1e-13 of its peak.
double estimate_decay_order(const Spectrum& spec);

/// Derivative budget: with decay order m, any x-order k and sigma-order n
/// with 2n + k <= 2l stay inside the convergence region (m > p + 1 + 2l).
struct SmoothnessBudget {
  double m = 0.0;
  int l = 0;

  bool admits(double p, int k, int sigma_order = 0) const;
  /// Largest l with m > p + 1 + 2l (capped at 32); SmoothnessViolation when
  /// even l = 0 is out of reach.
  static SmoothnessBudget from_decay(double m, double p);
};

SmoothnessBudget estimate_budget(const SignalGrid& sig, double p);

/// (i w)^p F(i w), realized as cos(p pi/2)|w|^p + sin(p pi/2) i sgn(w)|w|^p.
/// Throws SmoothnessViolation when the estimated decay order is <= p + 1.
SignalGrid fractional_derivative(const SignalGrid& sig, double p);

/// Fourier multiplier of d^kx/dx^kx d^ns/dsigma^ns d^np/dp^np applied to the
/// kernel transfer: (i w)^kx * H_ns(sigma) * (ln|w|)^np * transfer(w, sigma).
/// The zero-frequency p-derivative is taken as 0.
std::complex<double> field_multiplier(const KernelParams& params, double omega, double sigma,
                                      int kx, int n_sigma = 0, int n_p = 0);

/// Geometric ladder sigma_min * ratio^j (j < count), prefixed with sigma = 0.
std::vector<double> geometric_sigma_ladder(double sigma_min, double ratio, std::size_t count);
/// sigma = 0, h, 2h, ..., (count - 1) h.
std::vector<double> uniform_sigma_ladder(double step, std::size_t count);

/// d^k Psi / dx^k sampled on (sigma_j, x_i); row-major [sigma][x].
struct FieldGrid {
  double x0 = 0.0;
  double dx = 1.0;
  std::size_t n = 0;
  std::vector<double> sigma;
  int k = 0;
  KernelParams params;
  std::vector<double> values;

  std::size_t rows() const { return sigma.size(); }
  double x(std::size_t i) const { return x0 + static_cast<double>(i) * dx; }
  double at(std::size_t row, std::size_t i) const { return values[row * n + i]; }
  std::span<const double> row(std::size_t r) const { return {values.data() + r * n, n}; }
  /// Row stored for |s|; the field is even in sigma. Throws std::out_of_range
  /// when |s| is not on the ladder.
  std::span<const double> row_at_sigma(double s) const;
  double scale() const;
};

/// Synthesizes every sigma row as the inverse transform of
/// (i w)^k transfer(w, sigma) F(i w). Rows run in parallel; the result does
/// not depend on scheduling.
FieldGrid synth_field(const SignalGrid& sig, const KernelParams& params, int k,
                      const std::vector<double>& sigma_grid, const SmoothnessBudget& budget);

/// Same, with the budget estimated from the signal.
FieldGrid synth_field(const SignalGrid& sig, const KernelParams& params, int k,
                      const std::vector<double>& sigma_grid);

/// |dPsi/dsigma - sigma d2Psi/dx2| / max|Psi| by central differences on nodes
/// whose sigma neighbours are evenly spaced; every other node reads 0.
/// Throws GridTooCoarse when no such node exists.
std::vector<double> pde_residual(const FieldGrid& field);

/// Point evaluation of d^kx/dx^kx d^ns/dsigma^ns d^np/dp^np Psi at arbitrary
/// (x, sigma) by direct summation over the signal's spectrum. Used where
/// grid interpolation is too coarse: contour projection, critical points.
class FieldEvaluator {
 public:
  FieldEvaluator(const SignalGrid& sig, const KernelParams& params);

  double eval(double x, double sigma, int kx, int n_sigma = 0, int n_p = 0) const;
  const KernelParams& params() const { return params_; }
  double x_min() const { return x0_; }
  double x_max() const { return x0_ + static_cast<double>(n_) * dx_; }

 private:
  KernelParams params_;
  double x0_;
  double dx_;
  std::size_t n_;
  double domega_;
  std::vector<std::complex<double>> half_;  // F(w_m) transfer(w_m, 0) / (N dx), doubled for m > 0
};

}  // namespace scalespace
