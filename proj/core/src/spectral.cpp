#include "scalespace/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

#include "scalespace/errors.hpp"
#include "scalespace/parallel.hpp"

namespace scalespace {

namespace {

// FFTW planning is not thread-safe; execution on fresh arrays is.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(std::size_t n, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<std::complex<double>> in(n), out(n);
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(in.data()),
                                      reinterpret_cast<fftw_complex*>(out.data()), sign,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

void fft(std::vector<std::complex<double>>& in, std::vector<std::complex<double>>& out, int sign) {
  out.resize(in.size());
  fftw_execute_dft(PlanCache::instance().get(in.size(), sign),
                   reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
}

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Physicists' Hermite polynomial H_n(t).
double hermite(int n, double t) {
  double h0 = 1.0;
  if (n == 0) return h0;
  double h1 = 2.0 * t;
  for (int k = 1; k < n; ++k) {
    const double h2 = 2.0 * t * h1 - 2.0 * k * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

// FFT-order index -> frequency index m in [-N/2, N/2).
long signed_index(std::size_t idx, std::size_t n) {
  const long i = static_cast<long>(idx);
  const long half = static_cast<long>(n / 2);
  return i < half ? i : i - static_cast<long>(n);
}

// Multiplier applied in FFT order, with the Nyquist bin made Hermitian.
std::complex<double> hermitian_multiplier(const KernelParams& params, double omega, bool nyquist,
                                          double sigma, int k) {
  std::complex<double> mult = field_multiplier(params, omega, sigma, k);
  if (nyquist) mult = std::complex<double>(mult.real(), 0.0);
  return mult;
}

}  // namespace

double SignalGrid::scale() const { return max_abs(samples); }

void SignalGrid::validate() const {
  if (samples.size() < 16 || !is_pow2(samples.size())) {
    throw ConfigError("signal length must be a power of two >= 16 (got " +
                      std::to_string(samples.size()) + ")");
  }
  if (!(dx > 0.0) || !std::isfinite(dx) || !std::isfinite(x0)) {
    throw ConfigError("signal spacing must be positive and finite");
  }
  for (double v : samples) {
    if (!std::isfinite(v)) throw ConfigError("signal samples must be finite");
  }
}

double Spectrum::dx() const {
  return 2.0 * std::numbers::pi / (static_cast<double>(coeffs.size()) * domega);
}

Spectrum forward_transform(const SignalGrid& sig) {
  sig.validate();
  const std::size_t n = sig.size();
  std::vector<std::complex<double>> in(sig.samples.begin(), sig.samples.end()), out;
  fft(in, out, FFTW_FORWARD);

  Spectrum spec;
  spec.x0 = sig.x0;
  spec.domega = 2.0 * std::numbers::pi / (static_cast<double>(n) * sig.dx);
  spec.coeffs.resize(n);
  for (std::size_t idx = 0; idx < n; ++idx) {
    const long m = signed_index(idx, n);
    const double omega = static_cast<double>(m) * spec.domega;
    const std::size_t j = static_cast<std::size_t>(m + static_cast<long>(n / 2));
    spec.coeffs[j] = sig.dx * std::polar(1.0, -omega * sig.x0) * out[idx];
  }
  return spec;
}

std::vector<std::complex<double>> inverse_transform_complex(const Spectrum& spec) {
  const std::size_t n = spec.size();
  if (n < 16 || !is_pow2(n)) throw ConfigError("spectrum length must be a power of two >= 16");
  const double dx = spec.dx();
  std::vector<std::complex<double>> in(n), out;
  for (std::size_t j = 0; j < n; ++j) {
    const long m = static_cast<long>(j) - static_cast<long>(n / 2);
    const std::size_t idx = static_cast<std::size_t>(m < 0 ? m + static_cast<long>(n) : m);
    in[idx] = spec.coeffs[j] * std::polar(1.0, spec.omega(j) * spec.x0);
  }
  fft(in, out, FFTW_BACKWARD);
  const double norm = 1.0 / (static_cast<double>(n) * dx);
  for (auto& v : out) v *= norm;
  return out;
}

SignalGrid inverse_transform(const Spectrum& spec) {
  auto full = inverse_transform_complex(spec);
  SignalGrid sig;
  sig.x0 = spec.x0;
  sig.dx = spec.dx();
  sig.samples.resize(full.size());
  std::transform(full.begin(), full.end(), sig.samples.begin(),
                 [](std::complex<double> v) { return v.real(); });
  return sig;
}

double estimate_decay_order(const Spectrum& spec) {
  const std::size_t n = spec.size();
  const std::size_t half = n / 2;
  // positive frequencies only: j = half + m, m = 1 .. half - 1
  double peak = 0.0;
  for (std::size_t m = 0; m < half; ++m) peak = std::max(peak, std::abs(spec.coeffs[half + m]));
  if (peak == 0.0) return std::numeric_limits<double>::infinity();

  const double floor = 1e-13 * peak;
  std::size_t top = 0;
  for (std::size_t m = 1; m < half; ++m) {
    if (std::abs(spec.coeffs[half + m]) > floor) top = m;
  }
  if (top < 8) return std::numeric_limits<double>::infinity();

  // upper envelope of |F| over log-spaced bins of the octave [top/2, top]
  constexpr int kBins = 8;
  std::vector<double> lx, ly;
  const double lo = std::log(static_cast<double>(top) / 2.0);
  const double hi = std::log(static_cast<double>(top) + 1.0);
  for (int b = 0; b < kBins; ++b) {
    const double a0 = std::exp(lo + (hi - lo) * b / kBins);
    const double a1 = std::exp(lo + (hi - lo) * (b + 1) / kBins);
    double best = 0.0, best_m = 0.0;
    for (std::size_t m = static_cast<std::size_t>(std::ceil(a0)); static_cast<double>(m) < a1 && m <= top; ++m) {
      const double v = std::abs(spec.coeffs[half + m]);
      if (v > best) {
        best = v;
        best_m = static_cast<double>(m);
      }
    }
    if (best > 0.0) {
      lx.push_back(std::log(best_m * spec.domega));
      ly.push_back(std::log(best));
    }
  }
  if (lx.size() < 2) return std::numeric_limits<double>::infinity();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(lx.size());
  my /= static_cast<double>(lx.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (sxx == 0.0) return std::numeric_limits<double>::infinity();
  return -sxy / sxx;
}

bool SmoothnessBudget::admits(double p, int k, int sigma_order) const {
  return m > p + 1.0 + 2.0 * l && k >= 0 && sigma_order >= 0 && 2 * sigma_order + k <= 2 * l;
}

SmoothnessBudget SmoothnessBudget::from_decay(double m, double p) {
  if (!(m > p + 1.0)) {
    throw SmoothnessViolation("spectral decay order m = " + std::to_string(m) +
                              " does not exceed p + 1 = " + std::to_string(p + 1.0));
  }
  constexpr int kMaxL = 32;
  int l = 0;
  while (l < kMaxL && m > p + 1.0 + 2.0 * (l + 1)) ++l;
  return {m, l};
}

SmoothnessBudget estimate_budget(const SignalGrid& sig, double p) {
  return SmoothnessBudget::from_decay(estimate_decay_order(forward_transform(sig)), p);
}

SignalGrid fractional_derivative(const SignalGrid& sig, double p) {
  if (!(p >= 0.0)) throw ConfigError("fractional order must be non-negative");
  Spectrum spec = forward_transform(sig);
  SmoothnessBudget::from_decay(estimate_decay_order(spec), p);
  if (p == 0.0) return sig;
  const KernelParams params = KernelParams::fractional_derivative(p);
  for (std::size_t j = 0; j < spec.size(); ++j) {
    spec.coeffs[j] *= hermitian_multiplier(params, spec.omega(j), j == 0, 0.0, 0);
  }
  return inverse_transform(spec);
}

std::complex<double> field_multiplier(const KernelParams& params, double omega, double sigma,
                                      int kx, int n_sigma, int n_p) {
  std::complex<double> mult = transfer(params, omega, sigma);
  if (kx > 0) mult *= std::pow(std::complex<double>(0.0, omega), kx);
  if (n_sigma > 0) {
    const double ra = std::abs(omega) / std::numbers::sqrt2;
    mult *= std::pow(-ra, n_sigma) * hermite(n_sigma, ra * sigma);
  }
  if (n_p > 0) {
    if (omega == 0.0) return 0.0;
    mult *= std::pow(std::log(std::abs(omega)), n_p);
  }
  return mult;
}

std::vector<double> geometric_sigma_ladder(double sigma_min, double ratio, std::size_t count) {
  if (!(sigma_min > 0.0) || !(ratio > 1.0)) {
    throw ConfigError("sigma ladder needs sigma_min > 0 and ratio > 1");
  }
  std::vector<double> s{0.0};
  for (std::size_t j = 0; j < count; ++j) s.push_back(sigma_min * std::pow(ratio, static_cast<double>(j)));
  return s;
}

std::vector<double> uniform_sigma_ladder(double step, std::size_t count) {
  if (!(step > 0.0) || count < 2) throw ConfigError("uniform ladder needs step > 0 and >= 2 rows");
  std::vector<double> s(count);
  for (std::size_t j = 0; j < count; ++j) s[j] = step * static_cast<double>(j);
  return s;
}

std::span<const double> FieldGrid::row_at_sigma(double s) const {
  const double a = std::abs(s);
  for (std::size_t r = 0; r < sigma.size(); ++r) {
    if (std::abs(sigma[r] - a) <= 1e-12 * std::max(1.0, a)) return row(r);
  }
  throw std::out_of_range("sigma " + std::to_string(s) + " is not on the field's ladder");
}

double FieldGrid::scale() const { return max_abs(values); }

FieldGrid synth_field(const SignalGrid& sig, const KernelParams& params, int k,
                      const std::vector<double>& sigma_grid, const SmoothnessBudget& budget) {
  params.validate();
  sig.validate();
  if (k < 0) throw ConfigError("derivative order k must be non-negative");
  if (sigma_grid.empty() || sigma_grid.front() != 0.0) {
    throw ConfigError("sigma grid must start at sigma = 0");
  }
  for (std::size_t j = 1; j < sigma_grid.size(); ++j) {
    if (!(sigma_grid[j] > sigma_grid[j - 1])) throw ConfigError("sigma grid must be strictly ascending");
  }
  if (!budget.admits(params.p, k)) {
    throw SmoothnessViolation("budget (m = " + std::to_string(budget.m) + ", l = " +
                              std::to_string(budget.l) + ") does not admit p = " +
                              std::to_string(params.p) + ", k = " + std::to_string(k));
  }

  const std::size_t n = sig.size();
  std::vector<std::complex<double>> in(sig.samples.begin(), sig.samples.end()), spec;
  fft(in, spec, FFTW_FORWARD);
  // exact Hermitian symmetry keeps rows real even where |w|^(p+k) amplifies rounding
  spec[0] = spec[0].real();
  spec[n / 2] = spec[n / 2].real();
  for (std::size_t m = 1; m < n / 2; ++m) {
    const std::complex<double> avg = 0.5 * (spec[m] + std::conj(spec[n - m]));
    spec[m] = avg;
    spec[n - m] = std::conj(avg);
  }
  const double domega = 2.0 * std::numbers::pi / (static_cast<double>(n) * sig.dx);

  if (sigma_grid.size() > 1) {
    // aliasing check on the finest positive scale
    const double s_min = sigma_grid[1];
    const double omega_nyq = std::numbers::pi / sig.dx;
    if (std::exp(-0.5 * omega_nyq * omega_nyq * s_min * s_min) > 0.99) {
      double peak = 0.0, top = 0.0;
      for (std::size_t idx = 0; idx < n; ++idx) {
        const double omega = static_cast<double>(signed_index(idx, n)) * domega;
        const double v = std::abs(spec[idx] * field_multiplier(params, omega, 0.0, k));
        peak = std::max(peak, v);
        if (std::abs(omega) >= 0.5 * omega_nyq) top = std::max(top, v);
      }
      if (peak > 0.0 && top > 1e-8 * peak) {
        throw GridTooCoarse("smallest positive sigma " + std::to_string(s_min) +
                            " leaves the Nyquist band unattenuated and the spectrum is not negligible there");
      }
    }
  }

  FieldGrid field;
  field.x0 = sig.x0;
  field.dx = sig.dx;
  field.n = n;
  field.sigma = sigma_grid;
  field.k = k;
  field.params = params;
  field.values.assign(sigma_grid.size() * n, 0.0);

  parallel_for(sigma_grid.size(), [&](std::size_t r) {
    const double s = sigma_grid[r];
    std::vector<std::complex<double>> buf(n), out;
    for (std::size_t idx = 0; idx < n; ++idx) {
      const long m = signed_index(idx, n);
      const double omega = static_cast<double>(m) * domega;
      buf[idx] = spec[idx] * hermitian_multiplier(params, omega, m == -static_cast<long>(n / 2), s, k);
    }
    fft(buf, out, FFTW_BACKWARD);
    const double norm = 1.0 / static_cast<double>(n);
    double re_max = 0.0, im_max = 0.0;
    double* dst = field.values.data() + r * n;
    for (std::size_t i = 0; i < n; ++i) {
      dst[i] = out[i].real() * norm;
      re_max = std::max(re_max, std::abs(dst[i]));
      im_max = std::max(im_max, std::abs(out[i].imag() * norm));
    }
    if (im_max > 1e-10 * re_max && im_max > 1e-300) {
      throw std::logic_error("field row at sigma " + std::to_string(s) + " is not real");
    }
  });
  return field;
}

FieldGrid synth_field(const SignalGrid& sig, const KernelParams& params, int k,
                      const std::vector<double>& sigma_grid) {
  return synth_field(sig, params, k, sigma_grid, estimate_budget(sig, params.p));
}

std::vector<double> pde_residual(const FieldGrid& field) {
  const std::size_t rows = field.rows(), n = field.n;
  std::vector<double> out(field.values.size(), 0.0);
  const double scale = field.scale();
  if (rows < 3 || n < 3) throw GridTooCoarse("PDE residual needs at least 3 sigma rows and 3 columns");
  bool any = false;
  const double inv_dx2 = 1.0 / (field.dx * field.dx);
  for (std::size_t r = 1; r + 1 < rows; ++r) {
    const double h0 = field.sigma[r] - field.sigma[r - 1];
    const double h1 = field.sigma[r + 1] - field.sigma[r];
    if (std::abs(h1 - h0) > 1e-9 * std::max(h0, h1)) continue;
    any = true;
    if (scale == 0.0) continue;
    const double s = field.sigma[r];
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double d_sigma = (field.at(r + 1, i) - field.at(r - 1, i)) / (2.0 * h0);
      const double d_xx = (field.at(r, i + 1) - 2.0 * field.at(r, i) + field.at(r, i - 1)) * inv_dx2;
      out[r * n + i] = std::abs(d_sigma - s * d_xx) / scale;
    }
  }
  if (!any) throw GridTooCoarse("no interior sigma node with evenly spaced neighbours");
  return out;
}

FieldEvaluator::FieldEvaluator(const SignalGrid& sig, const KernelParams& params)
    : params_(params), x0_(sig.x0), dx_(sig.dx), n_(sig.size()) {
  params.validate();
  Spectrum spec = forward_transform(sig);
  domega_ = spec.domega;
  const std::size_t half = n_ / 2;
  // fold 1/(N dx) and the sigma-free transfer into each bin
  const double norm = 1.0 / (static_cast<double>(n_) * dx_);
  half_.resize(half);
  for (std::size_t m = 0; m < half; ++m) {
    const double omega = static_cast<double>(m) * domega_;
    half_[m] = spec.coeffs[half + m] * transfer(params_, omega, 0.0) * norm * (m == 0 ? 1.0 : 2.0);
  }
}

double FieldEvaluator::eval(double x, double sigma, int kx, int n_sigma, int n_p) const {
  // real signal and Hermitian multiplier: fold negative frequencies onto
  // positive ones; the Nyquist bin is dropped
  double acc = 0.0;
  const double ra_unit = domega_ / std::numbers::sqrt2;
  for (std::size_t m = 0; m < half_.size(); ++m) {
    if (m == 0 && (kx > 0 || n_sigma > 0 || n_p > 0)) continue;
    const double omega = static_cast<double>(m) * domega_;
    const double damp = std::exp(-0.5 * omega * omega * sigma * sigma);
    if (damp == 0.0) break;
    std::complex<double> v = half_[m] * damp;
    switch (kx & 3) {
      case 1: v *= std::complex<double>(0.0, 1.0); break;
      case 2: v = -v; break;
      case 3: v *= std::complex<double>(0.0, -1.0); break;
      default: break;
    }
    double scale = kx > 0 ? std::pow(omega, kx) : 1.0;
    if (n_sigma > 0) {
      const double ra = ra_unit * static_cast<double>(m);
      scale *= std::pow(-ra, n_sigma) * hermite(n_sigma, ra * sigma);
    }
    if (n_p > 0) scale *= std::pow(std::log(omega), n_p);
    acc += scale * (v * std::polar(1.0, omega * x)).real();
  }
  return acc;
}

}  // namespace scalespace
