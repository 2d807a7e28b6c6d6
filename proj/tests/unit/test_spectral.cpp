#include <cmath>
#include <cstdlib>
#include <limits>

#include "doctest.h"
#include "fixtures.hpp"
#include "scalespace/errors.hpp"
#include "scalespace/spectral.hpp"

using namespace scalespace;

TEST_CASE("forward then inverse transform is the identity") {
  const SignalGrid s = fixtures::signal(fixtures::kS3);
  const SignalGrid back = inverse_transform(forward_transform(s));
  CHECK(back.x0 == s.x0);
  CHECK(back.dx == doctest::Approx(s.dx).epsilon(1e-15));
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(std::abs(back.samples[i] - s.samples[i]) <= 1e-12);
}

TEST_CASE("forward transform approximates the continuous transform") {
  // FT of exp(-x^2 / 2) is sqrt(2 pi) exp(-w^2 / 2)
  const SignalGrid s = fixtures::signal({{1.0, 0.0, 1.0}});
  const Spectrum spec = forward_transform(s);
  for (std::size_t j = 0; j < spec.size(); j += 37) {
    const double w = spec.omega(j);
    const double want = std::sqrt(2.0 * M_PI) * std::exp(-0.5 * w * w);
    CHECK(std::abs(spec.coeffs[j] - std::complex<double>(want, 0.0)) <= 1e-12);
  }
}

TEST_CASE("real spectrum gives a real signal") {
  const Spectrum spec = forward_transform(fixtures::signal(fixtures::kS2));
  const auto full = inverse_transform_complex(spec);
  for (const auto& v : full) CHECK(std::abs(v.imag()) <= 1e-12);
}

TEST_CASE("signal validation") {
  SignalGrid s;
  s.samples.assign(100, 0.0);
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s.samples.assign(128, 0.0);
  s.dx = 0.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s.dx = 0.1;
  s.samples[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("p = 0 field matches Gaussian smoothing of the bumps") {
  const SignalGrid s = fixtures::signal(fixtures::kS3);
  std::vector<double> lad = fixtures::ladder();
  lad.resize(35);  // sigma <= 1: periodic images stay below 1e-12
  REQUIRE(lad.back() < 1.0);
  for (int k = 0; k <= 2; ++k) {
    const FieldGrid f = synth_field(s, KernelParams::even(0.0), k, lad);
    double worst = 0.0;
    for (std::size_t r = 0; r < f.rows(); ++r) {
      for (std::size_t i = 0; i < f.n; ++i) {
        worst = std::max(worst, std::abs(f.at(r, i) - fixtures::smoothed(fixtures::kS3, f.x(i), f.sigma[r], k)));
      }
    }
    CAPTURE(k);
    CHECK(worst <= 1e-10 * f.scale());
  }
}

TEST_CASE("fractional derivative at integer order is the ordinary derivative") {
  const SignalGrid s = fixtures::signal(fixtures::kS2);
  const SignalGrid id = fractional_derivative(s, 0.0);
  CHECK(id.samples == s.samples);
  for (int p : {1, 2}) {
    const SignalGrid d = fractional_derivative(s, p);
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double want = fixtures::smoothed(fixtures::kS2, s.x(i), 0.0, p);
      worst = std::max(worst, std::abs(d.samples[i] - want));
      scale = std::max(scale, std::abs(want));
    }
    CHECK(worst <= 1e-10 * scale);
  }
}

TEST_CASE("fractional derivatives compose") {
  const SignalGrid s = fixtures::signal(fixtures::kS2);
  const SignalGrid twice = fractional_derivative(fractional_derivative(s, 0.25), 0.25);
  const SignalGrid once = fractional_derivative(s, 0.5);
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(std::abs(twice.samples[i] - once.samples[i]) <= 1e-10);
}

TEST_CASE("decay order separates smooth from kinked signals") {
  CHECK(estimate_decay_order(forward_transform(fixtures::signal(fixtures::kS1))) > 20.0);
  SignalGrid tent = fixtures::signal(fixtures::kS1);
  for (std::size_t i = 0; i < tent.size(); ++i) tent.samples[i] = std::max(0.0, 1.0 - std::abs(tent.x(i)) / 3.0);
  const double m = estimate_decay_order(forward_transform(tent));
  CHECK(m == doctest::Approx(2.0).epsilon(0.15));
  CHECK_THROWS_AS(fractional_derivative(tent, 1.5), SmoothnessViolation);
  CHECK_THROWS_AS(synth_field(tent, KernelParams::even(0.0), 1, fixtures::ladder()), SmoothnessViolation);
}

TEST_CASE("smoothness budget") {
  CHECK_THROWS_AS(SmoothnessBudget::from_decay(2.0, 1.0), SmoothnessViolation);
  const SmoothnessBudget b = SmoothnessBudget::from_decay(7.5, 1.0);
  CHECK(b.l == 2);
  CHECK(b.admits(1.0, 4));
  CHECK(b.admits(1.0, 2, 1));
  CHECK_FALSE(b.admits(1.0, 5));
  CHECK(SmoothnessBudget::from_decay(std::numeric_limits<double>::infinity(), 3.0).l == 32);
}

TEST_CASE("field satisfies the heat equation in sigma") {
  const SignalGrid s = fixtures::signal(fixtures::kS2);
  for (double p : {0.0, 0.7}) {
    const FieldGrid f = synth_field(s, KernelParams::even(p), 1, uniform_sigma_ladder(0.05, 41));
    const auto res = pde_residual(f);
    double worst = 0.0;
    for (double r : res) worst = std::max(worst, r);
    CAPTURE(p);
    CHECK(worst <= 1e-3);
  }
}

TEST_CASE("point evaluator agrees with the synthesized grid") {
  const SignalGrid s = fixtures::signal(fixtures::kS3);
  const KernelParams kp{0.4, 1.0, 0.8};
  const auto lad = fixtures::ladder();
  const FieldGrid f = synth_field(s, kp, 1, lad);
  const FieldEvaluator ev(s, kp);
  for (std::size_t r = 0; r < f.rows(); r += 9) {
    for (std::size_t i = 0; i < f.n; i += 101) CHECK(std::abs(ev.eval(f.x(i), f.sigma[r], 1) - f.at(r, i)) <= 1e-12);
  }
}

TEST_CASE("evaluator sigma and p derivatives match finite differences") {
  const SignalGrid s = fixtures::signal(fixtures::kS2);
  const double x = 0.9, sigma = 0.8, p = 0.6, h = 1e-4;
  const FieldEvaluator ev(s, KernelParams::even(p));
  const double ds = (ev.eval(x, sigma + h, 1) - ev.eval(x, sigma - h, 1)) / (2 * h);
  CHECK(ev.eval(x, sigma, 1, 1) == doctest::Approx(ds).epsilon(1e-6));
  const double dss = (ev.eval(x, sigma + h, 1, 1) - ev.eval(x, sigma - h, 1, 1)) / (2 * h);
  CHECK(ev.eval(x, sigma, 1, 2) == doctest::Approx(dss).epsilon(1e-6));
  const FieldEvaluator up(s, KernelParams::even(p + h)), down(s, KernelParams::even(p - h));
  const double dp = (up.eval(x, sigma, 1) - down.eval(x, sigma, 1)) / (2 * h);
  CHECK(ev.eval(x, sigma, 1, 0, 1) == doctest::Approx(dp).epsilon(1e-6));
  // sigma derivative of the k-field is sigma times the (k + 2)-field
  CHECK(ev.eval(x, sigma, 1, 1) == doctest::Approx(sigma * ev.eval(x, sigma, 3)).epsilon(1e-10));
}

TEST_CASE("ladders") {
  const auto g = geometric_sigma_ladder(0.02, 2.0, 4);
  REQUIRE(g.size() == 5);
  CHECK(g[0] == 0.0);
  CHECK(g[4] == doctest::Approx(0.16));
  const auto lad = fixtures::ladder();
  CHECK(lad.size() == 64);
  CHECK(lad.back() == doctest::Approx(20.0).epsilon(1e-12));
  CHECK_THROWS_AS(geometric_sigma_ladder(0.0, 2.0, 3), ConfigError);
  CHECK_THROWS_AS(uniform_sigma_ladder(0.1, 1), ConfigError);
  const FieldGrid f = synth_field(fixtures::signal(fixtures::kS1), KernelParams::even(0.0), 0, g);
  CHECK(f.row_at_sigma(-0.04).data() == f.row(2).data());
  CHECK_THROWS_AS(f.row_at_sigma(0.05), std::out_of_range);
  CHECK_THROWS_AS(synth_field(fixtures::signal(fixtures::kS1), KernelParams::even(0.0), 0, {0.1, 0.2}),
                  ConfigError);
}

TEST_CASE("under-resolved input is refused") {
  // a bump one sample wide still carries weight at Nyquist
  const SignalGrid s = fixtures::signal({{1.0, 0.0, 0.5}}, 64, -20.0, 40.0 / 64.0);
  try {
    (void)synth_field(s, KernelParams::even(0.0), 0, {0.0, 1e-4});
    FAIL("expected a numeric-budget error");
  } catch (const Error& e) {
    CHECK(e.error_class() == ErrorClass::NumericBudget);
  }
}

TEST_CASE("field synthesis does not depend on the thread count") {
  const SignalGrid s = fixtures::signal(fixtures::kS3);
  setenv("SCALESPACE_THREADS", "1", 1);
  const FieldGrid a = synth_field(s, KernelParams{0.3, 1.0, 1.1}, 1, fixtures::ladder());
  setenv("SCALESPACE_THREADS", "4", 1);
  const FieldGrid b = synth_field(s, KernelParams{0.3, 1.0, 1.1}, 1, fixtures::ladder());
  unsetenv("SCALESPACE_THREADS");
  CHECK(a.values == b.values);
}
