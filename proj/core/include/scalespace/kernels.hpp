#pragma once

#include <complex>

namespace scalespace {

enum class Parity { Even, Odd };

/// Weights and order of the two-part kernel family.
///
/// The spatial kernel is `alpha * rho^(p+1) * odd_p(x rho) + beta * rho^(p+1) *
/// even_p(x rho)`: alpha weights the odd part and beta the even part, here
/// and in `transfer()`.
struct KernelParams {
  double alpha = 0.0;
  double beta = 1.0;
  double p = 0.0;

  /// Throws ConfigError unless (alpha, beta) != (0, 0), p >= 0, and p > 0
  /// whenever the odd part is switched on.
  void validate() const;

  static KernelParams even(double p) { return {0.0, 1.0, p}; }
  static KernelParams odd(double p) { return {1.0, 0.0, p}; }
  /// Mix whose transfer function is (i w)^p: the Fourier fractional derivative.
  static KernelParams fractional_derivative(double p);
};

struct SeriesEvalConfig {
  double abs_tol = 1e-17;
  int max_terms = 200;

  void validate() const;
};

/// Largest |z| accepted by the power-series routes.
inline constexpr double kSeriesZMax = 8.0;

// Power series of the even/odd profiles. Both throw TruncationFailure when
// |z| > kSeriesZMax or when max_terms is exhausted before the terms fall
// below abs_tol.
double eval_series_even(double z, double p, const SeriesEvalConfig& cfg = {});
double eval_series_odd(double z, double p, const SeriesEvalConfig& cfg = {});

/// Same profiles through Kummer's transformation, summed in the log domain.
/// All terms past n = p/2 share one sign, so the result keeps full relative
/// accuracy far outside the power-series domain (algebraic tails included).
double eval_profile_even(double z, double p);
double eval_profile_odd(double z, double p);

double eval_series(Parity parity, double z, double p, const SeriesEvalConfig& cfg = {});
double eval_profile(Parity parity, double z, double p);

/// alpha rho^(p+1) odd_p(x rho) + beta rho^(p+1) even_p(x rho), series route.
double eval_kernel(const KernelParams& params, double x, double rho,
                   const SeriesEvalConfig& cfg = {});

/// Same kernel through the stable profile route; valid for any x.
double eval_kernel_stable(const KernelParams& params, double x, double rho);

/// [alpha i sgn(w) |w|^p + beta |w|^p] exp(-w^2 sigma^2 / 2), all transform
/// constants set to one.
std::complex<double> transfer(const KernelParams& params, double omega, double sigma);

/// Constant C with FT(profile_p) = C * (unit transfer of that parity), using
/// FT(f)(w) = int f(x) exp(-i w x) dx. The odd constant is negative.
double profile_transfer_constant(Parity parity, double p);

/// h'' + z h' + (p + 1) h for h = the parity-profile of order p, with the
/// derivatives taken term by term on the series.
double ode_residual(Parity parity, double p, double z, const SeriesEvalConfig& cfg = {});

}  // namespace scalespace
