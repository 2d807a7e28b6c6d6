#include <cmath>
#include <complex>
#include <numbers>

#include "doctest.h"
#include "kernel_oracle.hpp"
#include "scalespace/errors.hpp"
#include "scalespace/kernels.hpp"

using namespace scalespace;

TEST_CASE("series profiles match the frozen 1F1 table") {
  for (const auto& ref : fixtures::kProfileRefs) {
    CAPTURE(ref.p);
    CAPTURE(ref.z);
    CHECK(std::abs(eval_series_even(ref.z, ref.p) - ref.even) <= 1e-12);
    CHECK(std::abs(eval_series_odd(ref.z, ref.p) - ref.odd) <= 1e-12);
  }
}

TEST_CASE("Kummer route matches the frozen table") {
  for (const auto& ref : fixtures::kProfileRefs) {
    CAPTURE(ref.p);
    CAPTURE(ref.z);
    CHECK(std::abs(eval_profile_even(ref.z, ref.p) - ref.even) <= 1e-13);
    CHECK(std::abs(eval_profile_odd(ref.z, ref.p) - ref.odd) <= 1e-13);
  }
}

// Past |z| = 5 the alternating series loses digits to cancellation.
TEST_CASE("Kummer route agrees with the series where the series is well conditioned") {
  for (double p : {0.0, 0.3, 1.0, 2.5, 3.7}) {
    for (double z = -5.0; z <= 5.0; z += 0.37) {
      const double scale = 1.0 + std::abs(eval_profile_even(z, p));
      CHECK(std::abs(eval_series_even(z, p) - eval_profile_even(z, p)) <= 1e-9 * scale);
      CHECK(std::abs(eval_series_odd(z, p) - eval_profile_odd(z, p)) <= 1e-9 * scale);
    }
  }
}

TEST_CASE("p = 0 even profile is the unit Gaussian") {
  for (double z : {-3.0, -0.5, 0.0, 1.25, 6.0}) {
    const double g = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    CHECK(eval_profile_even(z, 0.0) == doctest::Approx(g).epsilon(1e-14));
  }
}

TEST_CASE("profiles have the stated parity") {
  for (double p : {0.4, 1.0, 2.2}) {
    for (double z : {0.3, 1.7, 5.0}) {
      CHECK(eval_profile_even(-z, p) == eval_profile_even(z, p));
      CHECK(eval_profile_odd(-z, p) == -eval_profile_odd(z, p));
    }
  }
}

TEST_CASE("series refuses |z| beyond its domain") {
  CHECK_THROWS_AS(eval_series_even(8.5, 1.0), TruncationFailure);
  CHECK_THROWS_AS(eval_series_odd(-9.0, 1.0), TruncationFailure);
  SeriesEvalConfig tight;
  tight.max_terms = 8;
  CHECK_THROWS_AS(eval_series_even(7.9, 1.3, tight), TruncationFailure);
}

TEST_CASE("profiles solve h'' + z h' + (p + 1) h = 0") {
  for (double p : {0.3, 1.0, 2.0, 2.5}) {
    double scale = 0.0;
    for (double z = -4.0; z <= 4.0; z += 0.125) scale = std::max(scale, std::abs(eval_series_even(z, p)));
    for (double z = -4.0; z <= 4.0; z += 0.125) {
      CHECK(std::abs(ode_residual(Parity::Even, p, z)) <= 1e-8 * scale);
      CHECK(std::abs(ode_residual(Parity::Odd, p, z)) <= 1e-8 * scale);
    }
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS((KernelParams{0.0, 0.0, 1.0}.validate()), ConfigError);
  CHECK_THROWS_AS((KernelParams{0.0, 1.0, -0.5}.validate()), ConfigError);
  CHECK_THROWS_AS((KernelParams{1.0, 0.0, 0.0}.validate()), ConfigError);
  CHECK_NOTHROW((KernelParams{1.0, 2.0, 0.5}.validate()));
  CHECK_NOTHROW(KernelParams::even(0.0).validate());
}

TEST_CASE("transfer pairs alpha with the odd multiplier") {
  const double w = -1.7, s = 0.6;
  const double env = std::pow(std::abs(w), 1.5) * std::exp(-0.5 * w * w * s * s);
  const auto even = transfer(KernelParams::even(1.5), w, s);
  const auto odd = transfer(KernelParams::odd(1.5), w, s);
  CHECK(even.real() == doctest::Approx(env));
  CHECK(even.imag() == 0.0);
  CHECK(odd.real() == 0.0);
  CHECK(odd.imag() == doctest::Approx(-env));
}

TEST_CASE("fractional-derivative mix has transfer (i w)^p") {
  for (double p : {0.25, 1.0, 1.5, 2.0}) {
    const KernelParams kp = KernelParams::fractional_derivative(p);
    for (double w : {-3.0, -0.4, 0.8, 2.5}) {
      const std::complex<double> iw(0.0, w);
      const auto want = std::pow(iw, p);
      const auto got = transfer(kp, w, 0.0);
      CHECK(std::abs(got - want) <= 1e-12 * std::abs(want));
    }
  }
}

TEST_CASE("transfer constants at integer orders") {
  CHECK(profile_transfer_constant(Parity::Even, 0.0) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(profile_transfer_constant(Parity::Even, 2.0) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(profile_transfer_constant(Parity::Odd, 1.0) == doctest::Approx(-1.0).epsilon(1e-13));
  CHECK(profile_transfer_constant(Parity::Odd, 2.5) < 0.0);
}

// Inverse transform of C * unit transfer by frequency quadrature. Half-integer
// p uses w = t^2 so the integrand stays smooth and even in t.
static double profile_by_quadrature(Parity parity, double p, double z) {
  const double c = profile_transfer_constant(parity, p);
  const double h = 1e-3;
  double sum = 0.0;
  if (p == 0.0) {
    sum = 0.5;
    for (int j = 1; j * h < 40.0; ++j) sum += std::exp(-0.5 * j * h * j * h) * std::cos(j * h * z);
  } else {
    for (int j = 1; j * h < 7.0; ++j) {
      const double t = j * h, w = t * t;
      const double env = 2.0 * std::pow(t, 2.0 * p + 1.0) * std::exp(-0.5 * w * w);
      sum += parity == Parity::Even ? env * std::cos(w * z) : -env * std::sin(w * z);
    }
  }
  return c * sum * h / std::numbers::pi;
}

TEST_CASE("profiles invert their transfer functions") {
  for (double p : {0.0, 0.5, 1.5, 2.5}) {
    for (double z : {0.0, 0.7, 2.0, 5.5}) {
      CAPTURE(p);
      CAPTURE(z);
      CHECK(std::abs(profile_by_quadrature(Parity::Even, p, z) - eval_profile_even(z, p)) <= 1e-9);
      if (p > 0.0) CHECK(std::abs(profile_by_quadrature(Parity::Odd, p, z) - eval_profile_odd(z, p)) <= 1e-9);
    }
  }
}

TEST_CASE("stable kernel scales with rho") {
  const KernelParams kp{0.5, 1.0, 1.3};
  const double rho = 2.0, x = 0.45;
  const double want = std::pow(rho, kp.p + 1) *
                      (kp.alpha * eval_profile_odd(x * rho, kp.p) + kp.beta * eval_profile_even(x * rho, kp.p));
  CHECK(eval_kernel_stable(kp, x, rho) == doctest::Approx(want).epsilon(1e-14));
  CHECK(eval_kernel(kp, x, rho) == doctest::Approx(want).epsilon(1e-12));
}
