#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "scalespace/spectral.hpp"

namespace fixtures {

// amplitude, centre, width
using Bump = std::array<double, 3>;

inline constexpr std::size_t kN = 2048;
inline constexpr double kX0 = -20.0;
inline constexpr double kDx = 40.0 / 2048.0;

inline const std::vector<Bump> kS1 = {{1.0, 0.3, 1.5}};
inline const std::vector<Bump> kS2 = {{1.0, -2.0, 2.2}, {0.8, 3.2, 1.7}};
inline const std::vector<Bump> kS3 = {{1.0, -5.0, 1.4}, {-0.5, 0.6, 1.0}, {0.7, 5.5, 1.8}};

inline double bumps(const std::vector<Bump>& spec, double x) {
  double v = 0.0;
  for (const auto& b : spec) v += b[0] * std::exp(-0.5 * std::pow((x - b[1]) / b[2], 2));
  return v;
}

// n-th x-derivative of the bumps smoothed by a Gaussian of width sigma.
inline double smoothed(const std::vector<Bump>& spec, double x, double sigma, int n = 0) {
  double v = 0.0;
  for (const auto& b : spec) {
    const double s2 = b[2] * b[2] + sigma * sigma;
    const double u = (x - b[1]) / std::sqrt(s2);
    // probabilists' Hermite polynomial He_n(u)
    double h0 = 1.0, h1 = u;
    double he = n == 0 ? h0 : h1;
    for (int j = 2; j <= n; ++j) {
      he = u * h1 - (j - 1) * h0;
      h0 = h1;
      h1 = he;
    }
    const double sign = n % 2 == 0 ? 1.0 : -1.0;
    v += b[0] * b[2] / std::sqrt(s2) * sign * he * std::pow(s2, -0.5 * n) * std::exp(-0.5 * u * u);
  }
  return v;
}

// a * f(b x + c) is again a sum of bumps.
inline std::vector<Bump> affine(const std::vector<Bump>& spec, double a, double b, double c) {
  std::vector<Bump> out;
  for (const auto& bump : spec) out.push_back({a * bump[0], (bump[1] - c) / b, bump[2] / b});
  return out;
}

inline scalespace::SignalGrid signal(const std::vector<Bump>& spec, std::size_t n = kN, double x0 = kX0,
                                     double dx = kDx) {
  scalespace::SignalGrid s;
  s.x0 = x0;
  s.dx = dx;
  s.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.samples[i] = bumps(spec, s.x(i));
  return s;
}

// 64 rows: sigma = 0 and 0.02 * ratio^j up to 20.
inline std::vector<double> ladder() { return scalespace::geometric_sigma_ladder(0.02, std::pow(1000.0, 1.0 / 62.0), 63); }

}  // namespace fixtures
