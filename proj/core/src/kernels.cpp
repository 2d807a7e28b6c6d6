#include "scalespace/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "scalespace/errors.hpp"

namespace scalespace {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;  // 1/sqrt(2 pi)

void check_series_domain(double z, const SeriesEvalConfig& cfg) {
  cfg.validate();
  if (!std::isfinite(z) || std::abs(z) > kSeriesZMax) {
    throw TruncationFailure("|z| = " + std::to_string(std::abs(z)) +
                            " outside the series domain; use the frequency-domain route");
  }
}

[[noreturn]] void throw_exhausted(double z, int max_terms) {
  throw TruncationFailure("series at z = " + std::to_string(z) + " did not settle within " +
                          std::to_string(max_terms) + " terms");
}

// Terms shrink monotonically once the term ratio drops below one.
bool settled(double term, double ratio, double tol) {
  return std::abs(term) < tol && std::abs(ratio) < 1.0;
}

// sum_n (a)_n / ((b)_n n!) x^n, multiplied by exp(-x), accumulated in the log domain.
double kummer_scaled(double a, double b, double x) {
  if (x == 0.0) return 1.0;
  double log_term = -x;
  double sign = 1.0;
  double sum = std::exp(log_term);
  const double log_x = std::log(x);
  const long max_n = static_cast<long>(20.0 * x) + 2000;
  for (long n = 0; n < max_n; ++n) {
    const double an = a + static_cast<double>(n);
    if (an == 0.0) return sum;  // the series terminates: polynomial case
    if (an < 0.0) sign = -sign;
    log_term += std::log(std::abs(an)) - std::log(b + static_cast<double>(n)) -
                std::log(static_cast<double>(n + 1)) + log_x;
    const double term = sign * std::exp(log_term);
    sum += term;
    const bool past_peak = static_cast<double>(n) > x + 1.0 && an > 0.0;
    if (past_peak && std::abs(term) <= 1e-18 * std::abs(sum)) return sum;
    if (past_peak && std::abs(term) < 1e-300) return sum;
  }
  throw TruncationFailure("Kummer series did not settle at x = " + std::to_string(x));
}

}  // namespace

void KernelParams::validate() const {
  if (!std::isfinite(alpha) || !std::isfinite(beta) || !std::isfinite(p)) {
    throw ConfigError("kernel parameters must be finite");
  }
  if (alpha == 0.0 && beta == 0.0) throw ConfigError("(alpha, beta) must not both be zero");
  if (p < 0.0) throw ConfigError("kernel order p must be non-negative");
  if (alpha != 0.0 && p == 0.0) {
    throw ConfigError("the odd part (alpha != 0) requires p > 0");
  }
}

KernelParams KernelParams::fractional_derivative(double p) {
  // (i w)^p = |w|^p [cos(p pi/2) + i sgn(w) sin(p pi/2)]
  const double half_turns = p / 2.0;
  double c = std::cos(half_turns * std::numbers::pi);
  double s = std::sin(half_turns * std::numbers::pi);
  if (p == std::floor(p)) {
    // integer orders get exact weights so p = 1, 2, ... reproduce classical derivatives
    const long q = static_cast<long>(p) % 4;
    c = (q == 0) ? 1.0 : (q == 2) ? -1.0 : 0.0;
    s = (q == 1) ? 1.0 : (q == 3) ? -1.0 : 0.0;
  }
  return {s, c, p};
}

void SeriesEvalConfig::validate() const {
  if (!(abs_tol > 0.0)) throw ConfigError("series abs_tol must be positive");
  if (max_terms < 8) throw ConfigError("series max_terms must be at least 8");
}

double eval_series_even(double z, double p, const SeriesEvalConfig& cfg) {
  check_series_domain(z, cfg);
  const double z2 = z * z;
  double term = 1.0;
  double sum = 1.0;
  for (int n = 1; n < cfg.max_terms; ++n) {
    const double nn = static_cast<double>(n);
    const double ratio = -z2 * (p + 2.0 * nn - 1.0) / ((2.0 * nn - 1.0) * (2.0 * nn));
    term *= ratio;
    sum += term;
    const double next_ratio = z2 * (p + 2.0 * nn + 1.0) / ((2.0 * nn + 1.0) * (2.0 * nn + 2.0));
    if (settled(term, next_ratio, cfg.abs_tol)) return kInvSqrt2Pi * sum;
  }
  throw_exhausted(z, cfg.max_terms);
}

double eval_series_odd(double z, double p, const SeriesEvalConfig& cfg) {
  check_series_domain(z, cfg);
  // evaluate at |z| and restore the sign: oddness holds bit for bit
  const double a = std::abs(z);
  const double z2 = a * a;
  double term = p * a;
  double sum = term;
  if (term != 0.0) {
    bool done = false;
    for (int n = 1; n < cfg.max_terms; ++n) {
      const double nn = static_cast<double>(n);
      term *= -z2 * (p + 2.0 * nn) / ((2.0 * nn) * (2.0 * nn + 1.0));
      sum += term;
      const double next_ratio = z2 * (p + 2.0 * nn + 2.0) / ((2.0 * nn + 2.0) * (2.0 * nn + 3.0));
      if (settled(term, next_ratio, cfg.abs_tol)) {
        done = true;
        break;
      }
    }
    if (!done) throw_exhausted(z, cfg.max_terms);
  }
  const double value = kInvSqrt2Pi * sum;
  return std::signbit(z) ? -value : value;
}

double eval_profile_even(double z, double p) {
  return kInvSqrt2Pi * kummer_scaled(-0.5 * p, 0.5, 0.5 * z * z);
}

double eval_profile_odd(double z, double p) {
  const double a = std::abs(z);
  const double value = kInvSqrt2Pi * p * a * kummer_scaled(0.5 - 0.5 * p, 1.5, 0.5 * a * a);
  return std::signbit(z) ? -value : value;
}

double eval_series(Parity parity, double z, double p, const SeriesEvalConfig& cfg) {
  return parity == Parity::Even ? eval_series_even(z, p, cfg) : eval_series_odd(z, p, cfg);
}

double eval_profile(Parity parity, double z, double p) {
  return parity == Parity::Even ? eval_profile_even(z, p) : eval_profile_odd(z, p);
}

double eval_kernel(const KernelParams& params, double x, double rho, const SeriesEvalConfig& cfg) {
  params.validate();
  if (!(rho > 0.0)) throw ConfigError("rho must be positive");
  const double amp = std::pow(rho, params.p + 1.0);
  const double z = x * rho;
  double value = 0.0;
  if (params.alpha != 0.0) value += params.alpha * amp * eval_series_odd(z, params.p, cfg);
  if (params.beta != 0.0) value += params.beta * amp * eval_series_even(z, params.p, cfg);
  return value;
}

double eval_kernel_stable(const KernelParams& params, double x, double rho) {
  params.validate();
  if (!(rho > 0.0)) throw ConfigError("rho must be positive");
  const double amp = std::pow(rho, params.p + 1.0);
  const double z = x * rho;
  double value = 0.0;
  if (params.alpha != 0.0) value += params.alpha * amp * eval_profile_odd(z, params.p);
  if (params.beta != 0.0) value += params.beta * amp * eval_profile_even(z, params.p);
  return value;
}

std::complex<double> transfer(const KernelParams& params, double omega, double sigma) {
  const double mag = std::pow(std::abs(omega), params.p);
  const double sgn = (omega > 0.0) ? 1.0 : (omega < 0.0 ? -1.0 : 0.0);
  const double damp = std::exp(-0.5 * omega * omega * sigma * sigma);
  return std::complex<double>(params.beta * mag, params.alpha * sgn * mag) * damp;
}

double profile_transfer_constant(Parity parity, double p) {
  constexpr double kSqrt2Pi = 2.5066282746310002;
  if (parity == Parity::Even) {
    return std::numbers::pi / (kSqrt2Pi * std::pow(2.0, 0.5 * (p - 1.0)) * std::tgamma(0.5 * (p + 1.0)));
  }
  return -p * std::numbers::pi / (kSqrt2Pi * std::pow(2.0, 0.5 * p) * std::tgamma(0.5 * p + 1.0));
}

double ode_residual(Parity parity, double p, double z, const SeriesEvalConfig& cfg) {
  check_series_domain(z, cfg);
  // h = sum_n c_n z^(e_n); e_n = 2n (even) or 2n + 1 (odd)
  const int offset = parity == Parity::Even ? 0 : 1;
  double coeff = parity == Parity::Even ? 1.0 : p;
  double h = 0.0, dh = 0.0, d2h = 0.0;
  for (int n = 0; n < cfg.max_terms; ++n) {
    const double nn = static_cast<double>(n);
    if (n > 0) {
      coeff *= parity == Parity::Even
                   ? -(p + 2.0 * nn - 1.0) / ((2.0 * nn - 1.0) * (2.0 * nn))
                   : -(p + 2.0 * nn) / ((2.0 * nn) * (2.0 * nn + 1.0));
    }
    const int e = 2 * n + offset;
    const double ze = std::pow(z, e);
    const double t0 = coeff * ze;
    const double t1 = e >= 1 ? coeff * e * std::pow(z, e - 1) : 0.0;
    const double t2 = e >= 2 ? coeff * e * (e - 1) * std::pow(z, e - 2) : 0.0;
    h += t0;
    dh += t1;
    d2h += t2;
    const double mag = std::max({std::abs(t0), std::abs(t1), std::abs(t2)});
    if (n > 2 && mag < cfg.abs_tol && std::abs(coeff) * std::pow(std::abs(z) + 1.0, e) < cfg.abs_tol) {
      return kInvSqrt2Pi * (d2h + z * dh + (p + 1.0) * h);
    }
    if (coeff == 0.0) return kInvSqrt2Pi * (d2h + z * dh + (p + 1.0) * h);
  }
  throw_exhausted(z, cfg.max_terms);
}

}  // namespace scalespace
