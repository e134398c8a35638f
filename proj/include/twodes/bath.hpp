// bath.hpp - spectral densities, finite-temperature correlation function, memory time
#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "twodes/errors.hpp"
#include "twodes/linalg.hpp"
#include "twodes/threadpool.hpp"
#include "twodes/units.hpp"

namespace twodes {

// J(omega) families used by the presets. PowerLaw covers Ohmic (s = 1) and
// sub-Ohmic (s < 1); Structured is Ohmic plus a weak linear tail confined
// below a sharp cutoff, giving the bath a long algebraic memory.
struct SpectralDensity {
  enum class Kind { PowerLaw, Structured };

  Kind kind = Kind::PowerLaw;
  double lambda = 0.0;          // dimensionless system-bath coupling scale
  double s = 1.0;               // power-law exponent (PowerLaw only)
  double omega_c_rad_fs = 0.0;  // cutoff frequency
  double tail_weight = 0.01;          // Structured only
  double tail_cut_fraction = 0.05;    // tail support is omega <= fraction * omega_c

  void validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
      throw ConfigError("SpectralDensity: lambda must be >= 0");
    if (!(omega_c_rad_fs > 0.0))
      throw ConfigError("SpectralDensity: omega_c_rad_fs must be > 0");
    if (kind == Kind::PowerLaw && !(s > 0.0))
      throw ConfigError("SpectralDensity: exponent s must be > 0, got " + std::to_string(s));
    if (kind == Kind::Structured && (!(tail_weight >= 0.0) || !(tail_cut_fraction > 0.0)))
      throw ConfigError("SpectralDensity: invalid structured tail parameters");
  }

  double operator()(double omega) const {
    if (omega < 0.0)
      throw ConfigError("SpectralDensity: omega must be >= 0, got " + std::to_string(omega));
    const double pref = units::two_pi * lambda * lambda;
    if (kind == Kind::PowerLaw)
      return pref * std::pow(omega_c_rad_fs, 1.0 - s) * std::pow(omega, s) *
             std::exp(-omega / omega_c_rad_fs);
    // Structured: Ohmic base plus the confined linear tail, closed at the cut.
    double j = pref * omega * std::exp(-omega / omega_c_rad_fs);
    if (omega <= tail_cut_fraction * omega_c_rad_fs)
      j += tail_weight * pref * (omega / omega_c_rad_fs);
    return j;
  }

  static SpectralDensity power_law(double lambda, double s, double omega_c) {
    SpectralDensity sd;
    sd.kind = Kind::PowerLaw;
    sd.lambda = lambda;
    sd.s = s;
    sd.omega_c_rad_fs = omega_c;
    sd.validate();
    return sd;
  }

  static SpectralDensity structured(double lambda, double omega_c) {
    SpectralDensity sd;
    sd.kind = Kind::Structured;
    sd.lambda = lambda;
    sd.omega_c_rad_fs = omega_c;
    sd.validate();
    return sd;
  }
};

// C(t) sampled on a uniform grid t_k = k * dt_fs, k = 0..(samples.size()-1).
struct BathCorrelation {
  double dt_fs = 0.0;
  double beta_fs = 0.0;
  std::vector<Complex> samples;

  double grid_end_fs() const { return dt_fs * static_cast<double>(samples.size() - 1); }
};

namespace detail {

inline double coth(double x) {
  if (x < 1e-4) return 1.0 / x + x / 3.0 - x * x * x / 45.0;
  return 1.0 / std::tanh(x);
}

// One-sided frequency integral of f over [0, omega_hi], split into panels no
// wider than one oscillation period of the cos/sin factor, with mandatory
// breakpoints isolated. The first panel may carry an integrable omega^(s-1)
// endpoint singularity and is handled by tanh-sinh quadrature.
inline double frequency_integral(const std::function<double(double)>& f, double omega_hi,
                                 double t_fs, const std::vector<double>& breakpoints,
                                 bool singular_origin, double abs_floor, const char* what) {
  std::vector<double> edges{0.0};
  for (double b : breakpoints)
    if (b > 0.0 && b < omega_hi) edges.push_back(b);
  edges.push_back(omega_hi);
  std::sort(edges.begin(), edges.end());

  const double period = t_fs > 0.0 ? units::two_pi / t_fs : omega_hi;
  std::vector<double> grid;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double a = edges[i], b = edges[i + 1];
    const int n = std::max(1, static_cast<int>(std::ceil((b - a) / period)));
    for (int k = 0; k < n; ++k) grid.push_back(a + (b - a) * k / n);
  }
  grid.push_back(omega_hi);

  double total = 0.0, err_total = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double a = grid[i], b = grid[i + 1];
    double err = 0.0;
    double piece;
    if (i == 0 && singular_origin) {
      boost::math::quadrature::tanh_sinh<double> ts;
      double l1 = 0.0;
      std::size_t levels = 0;
      piece = ts.integrate(f, a, b, 1e-10, &err, &l1, &levels);
      err *= std::abs(piece);  // tanh_sinh reports relative error
    } else {
      piece = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 10, 1e-10,
                                                                            &err);
    }
    total += piece;
    err_total += err;
  }
  if (!(err_total <= std::max(1e-8 * std::abs(total), abs_floor)) || !std::isfinite(total))
    throw NumericalError(std::string("bath_correlation: ") + what +
                         " quadrature did not converge at t = " + std::to_string(t_fs) + " fs");
  return total;
}

}  // namespace detail

// C(t) = (1/pi) * Int_0^inf J(w) [coth(beta w / 2) cos(w t) - i sin(w t)] dw,
// truncated at 40 omega_c. The real part's coth factor leaves an integrable
// w^(s-1) divergence at the origin for sub-Ohmic exponents.
inline Complex bath_correlation_at(const SpectralDensity& sd, double beta_fs, double t_fs,
                                   double abs_floor = 0.0) {
  if (sd.lambda == 0.0) return {0.0, 0.0};
  const double hi = 40.0 * sd.omega_c_rad_fs;
  std::vector<double> breaks{sd.omega_c_rad_fs};
  if (sd.kind == SpectralDensity::Kind::Structured)
    breaks.push_back(sd.tail_cut_fraction * sd.omega_c_rad_fs);
  const bool singular = sd.kind == SpectralDensity::Kind::PowerLaw && sd.s < 1.0;

  auto re_f = [&](double w) {
    if (w <= 0.0) return 0.0;
    return sd(w) * detail::coth(0.5 * beta_fs * w) * std::cos(w * t_fs);
  };
  auto im_f = [&](double w) {
    if (w <= 0.0) return 0.0;
    return sd(w) * std::sin(w * t_fs);
  };
  const double re = detail::frequency_integral(re_f, hi, t_fs, breaks, singular, abs_floor, "real");
  const double im = detail::frequency_integral(im_f, hi, t_fs, breaks, false, abs_floor, "imag");
  return {re / units::pi, -im / units::pi};
}

inline BathCorrelation bath_correlation(const SpectralDensity& sd, double beta_fs, double dt_fs,
                                        std::size_t steps, int threads = 1) {
  sd.validate();
  if (!(beta_fs > 0.0)) throw ConfigError("bath_correlation: beta_fs must be > 0");
  if (!(dt_fs > 0.0)) throw ConfigError("bath_correlation: dt_fs must be > 0");

  BathCorrelation corr;
  corr.dt_fs = dt_fs;
  corr.beta_fs = beta_fs;
  corr.samples.assign(steps + 1, Complex{0.0, 0.0});
  if (sd.lambda == 0.0) return corr;

  const Complex c0 = bath_correlation_at(sd, beta_fs, 0.0);
  corr.samples[0] = c0;
  // Late samples are oscillatory and can cancel to well below C(0); accept an
  // absolute error commensurate with the overall correlation scale instead of
  // chasing an unattainable relative target there.
  const double floor = 1e-9 * std::abs(c0);
  parallel_for(steps, threads, [&](std::size_t i) {
    const double t = dt_fs * static_cast<double>(i + 1);
    corr.samples[i + 1] = bath_correlation_at(sd, beta_fs, t, floor);
  });
  return corr;
}

// Grid-level stand-in for C(t) = gamma * delta(t): a single nonzero sample
// whose trapezoid integral is gamma/2 from the first step onward.
inline BathCorrelation delta_correlation(double gamma, double dt_fs, std::size_t steps) {
  if (!(dt_fs > 0.0)) throw ConfigError("delta_correlation: dt_fs must be > 0");
  BathCorrelation corr;
  corr.dt_fs = dt_fs;
  corr.beta_fs = 1.0;
  corr.samples.assign(steps + 1, Complex{0.0, 0.0});
  corr.samples[0] = Complex{gamma / dt_fs, 0.0};
  return corr;
}

// Smallest grid time from which |C| stays below threshold * |C(0)|; grid end
// if the tail never settles below the threshold.
inline double memory_time(const BathCorrelation& corr, double threshold = 0.05) {
  if (corr.samples.empty() || std::abs(corr.samples[0]) == 0.0)
    throw ConfigError("memory_time: correlation is identically zero at t = 0");
  const double scale = std::abs(corr.samples[0]);
  std::size_t last_above = 0;
  for (std::size_t k = 0; k < corr.samples.size(); ++k)
    if (std::abs(corr.samples[k]) / scale >= threshold) last_above = k;
  const std::size_t idx = std::min(last_above + 1, corr.samples.size() - 1);
  return corr.dt_fs * static_cast<double>(idx);
}

}  // namespace twodes
