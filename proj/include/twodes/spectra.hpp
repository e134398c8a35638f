// spectra.hpp - 2D spectra, cross-peak trace, waiting-time beating analysis
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "twodes/errors.hpp"
#include "twodes/linalg.hpp"
#include "twodes/units.hpp"

namespace twodes {

enum class Channel { Rephasing, Nonrephasing };

struct Spectrum2D {
  std::vector<double> omega1_cm1;
  std::vector<double> omega3_cm1;
  Eigen::MatrixXcd amplitude;  // (omega1 index, omega3 index)
};

namespace detail {

inline double uniform_spacing(const std::vector<double>& grid, const char* what) {
  if (grid.size() < 2) throw ConfigError(std::string(what) + ": need at least two gridpoints");
  const double d = grid[1] - grid[0];
  if (!(d > 0.0)) throw ConfigError(std::string(what) + ": grid must be increasing");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (std::abs(grid[i] - grid[i - 1] - d) > 1e-9 * std::max(1.0, d))
      throw ConfigError(std::string(what) + ": grid must be uniformly spaced");
  return d;
}

}  // namespace detail

// Discrete half-sided Fourier transform of one (t1, t3) response panel,
// evaluated on a frequency grid matching a pad-times zero-padded FFT. The
// coherence-time phase runs backward for the rephasing channel, so both
// channels peak on the same positive-frequency axes. Endpoint samples carry
// half weight; axes are absolute, with the removed carrier restored.
inline Spectrum2D fourier_2d(const Eigen::MatrixXcd& panel, const std::vector<double>& t1_fs,
                             const std::vector<double>& t3_fs, Channel channel,
                             double carrier_cm1, int pad = 4) {
  if (pad < 1) throw ConfigError("fourier_2d: pad must be >= 1");
  const double dt1 = detail::uniform_spacing(t1_fs, "fourier_2d: t1");
  const double dt3 = detail::uniform_spacing(t3_fs, "fourier_2d: t3");
  const auto n1 = static_cast<Eigen::Index>(t1_fs.size());
  const auto n3 = static_cast<Eigen::Index>(t3_fs.size());
  if (panel.rows() != n1 || panel.cols() != n3)
    throw ConfigError("fourier_2d: panel shape does not match the time grids");

  const Eigen::Index m1 = pad * n1;
  const Eigen::Index m3 = pad * n3;
  const double dw1 = units::two_pi / (static_cast<double>(m1) * dt1);
  const double dw3 = units::two_pi / (static_cast<double>(m3) * dt3);
  const double sigma = channel == Channel::Rephasing ? -1.0 : 1.0;

  Spectrum2D spec;
  spec.omega1_cm1.resize(m1);
  spec.omega3_cm1.resize(m3);
  Eigen::MatrixXcd f1(m1, n1), f3(m3, n3);
  for (Eigen::Index m = 0; m < m1; ++m) {
    const double w = (static_cast<double>(m) - 0.5 * static_cast<double>(m1)) * dw1;
    spec.omega1_cm1[m] = carrier_cm1 + units::rad_fs_to_cm1(w);
    for (Eigen::Index i = 0; i < n1; ++i) {
      const double weight = i == 0 ? 0.5 : 1.0;
      f1(m, i) = weight * dt1 * std::exp(ii * sigma * w * t1_fs[i]);
    }
  }
  for (Eigen::Index m = 0; m < m3; ++m) {
    const double w = (static_cast<double>(m) - 0.5 * static_cast<double>(m3)) * dw3;
    spec.omega3_cm1[m] = carrier_cm1 + units::rad_fs_to_cm1(w);
    for (Eigen::Index j = 0; j < n3; ++j) {
      const double weight = j == 0 ? 0.5 : 1.0;
      f3(m, j) = weight * dt3 * std::exp(ii * w * t3_fs[j]);
    }
  }
  spec.amplitude = f1 * panel * f3.transpose();
  return spec;
}

// Purely absorptive part: the dispersive wings of the two channels cancel in
// the summed real part when their coherence phases counter-rotate.
inline Eigen::MatrixXd absorptive_spectrum(const Spectrum2D& rephasing,
                                           const Spectrum2D& nonrephasing) {
  if (rephasing.omega1_cm1 != nonrephasing.omega1_cm1 ||
      rephasing.omega3_cm1 != nonrephasing.omega3_cm1)
    throw ConfigError("absorptive_spectrum: channel spectra are on different axes");
  return (rephasing.amplitude + nonrephasing.amplitude).real();
}

struct CrosspeakWindow {
  double omega1_center_cm1 = 0.0;
  double omega3_center_cm1 = 0.0;
  double halfwidth_cm1 = 30.0;
};

// Largest absolute absorptive amplitude inside the rectangular window.
inline double crosspeak_amplitude(const Eigen::MatrixXd& absorptive,
                                  const std::vector<double>& omega1_cm1,
                                  const std::vector<double>& omega3_cm1,
                                  const CrosspeakWindow& window) {
  double best = -1.0;
  for (Eigen::Index i = 0; i < absorptive.rows(); ++i) {
    if (std::abs(omega1_cm1[i] - window.omega1_center_cm1) > window.halfwidth_cm1) continue;
    for (Eigen::Index j = 0; j < absorptive.cols(); ++j) {
      if (std::abs(omega3_cm1[j] - window.omega3_center_cm1) > window.halfwidth_cm1) continue;
      best = std::max(best, std::abs(absorptive(i, j)));
    }
  }
  if (best < 0.0)
    throw ConfigError("crosspeak_amplitude: window contains no spectral gridpoints");
  return best;
}

struct BeatingSpectrum {
  double trend_offset = 0.0;
  double trend_amplitude = 0.0;
  double trend_tau_fs = 0.0;
  std::vector<double> residual;   // trace minus fitted smooth decay
  std::vector<double> nu_cm1;     // one-sided oscillation-frequency axis
  std::vector<double> magnitude;  // windowed zero-padded DFT magnitude
  double peak_nu_cm1 = 0.0;
  double peak_magnitude = 0.0;
  double peak_to_median = 0.0;
};

namespace detail {

// Least-squares a + b exp(-T/tau) for fixed tau; returns the residual SSE.
inline double exp_trend_fit(const std::vector<double>& t, const std::vector<double>& y,
                            double tau, double* a_out, double* b_out) {
  const std::size_t n = t.size();
  double s11 = static_cast<double>(n), s1e = 0.0, see = 0.0, s1y = 0.0, sey = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = std::exp(-t[i] / tau);
    s1e += e;
    see += e * e;
    s1y += y[i];
    sey += e * y[i];
  }
  const double det = s11 * see - s1e * s1e;
  if (std::abs(det) < 1e-12 * std::max(1.0, s11 * see)) return std::numeric_limits<double>::max();
  const double a = (see * s1y - s1e * sey) / det;
  const double b = (s11 * sey - s1e * s1y) / det;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - a - b * std::exp(-t[i] / tau);
    sse += r * r;
  }
  *a_out = a;
  *b_out = b;
  return sse;
}

}  // namespace detail

// Oscillatory content of a waiting-time trace: remove the best smooth
// exponential trend, Hann-window the residual, and transform with dense
// zero padding. The dominant peak above min_nu_cm1 and its prominence over
// the median magnitude in the same band summarize the beating.
inline BeatingSpectrum beating_spectrum(const std::vector<double>& T_fs,
                                        const std::vector<double>& trace,
                                        double min_nu_cm1 = 20.0, int pad = 8) {
  if (T_fs.size() != trace.size())
    throw ConfigError("beating_spectrum: trace and grid sizes differ");
  const double dT = detail::uniform_spacing(T_fs, "beating_spectrum: T");
  const std::size_t n = T_fs.size();

  BeatingSpectrum out;
  double best_sse = std::numeric_limits<double>::max();
  const int coarse = 160;
  double tau_lo = 50.0, tau_hi = 5000.0;
  for (int i = 0; i < coarse; ++i) {
    const double tau = tau_lo * std::pow(tau_hi / tau_lo, static_cast<double>(i) / (coarse - 1));
    double a = 0.0, b = 0.0;
    const double sse = detail::exp_trend_fit(T_fs, trace, tau, &a, &b);
    if (sse < best_sse) {
      best_sse = sse;
      out.trend_offset = a;
      out.trend_amplitude = b;
      out.trend_tau_fs = tau;
    }
  }
  {
    // golden-section polish around the coarse winner
    const double ratio = std::pow(tau_hi / tau_lo, 1.0 / (coarse - 1));
    double lo = std::max(tau_lo, out.trend_tau_fs / ratio);
    double hi = std::min(tau_hi, out.trend_tau_fs * ratio);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    for (int it = 0; it < 60; ++it) {
      double a = 0.0, b = 0.0;
      const double f1 = detail::exp_trend_fit(T_fs, trace, x1, &a, &b);
      const double f2 = detail::exp_trend_fit(T_fs, trace, x2, &a, &b);
      if (f1 < f2) {
        hi = x2;
        x2 = x1;
        x1 = hi - gr * (hi - lo);
      } else {
        lo = x1;
        x1 = x2;
        x2 = lo + gr * (hi - lo);
      }
    }
    const double tau = 0.5 * (lo + hi);
    double a = 0.0, b = 0.0;
    const double sse = detail::exp_trend_fit(T_fs, trace, tau, &a, &b);
    if (sse < best_sse) {
      out.trend_offset = a;
      out.trend_amplitude = b;
      out.trend_tau_fs = tau;
    }
  }

  out.residual.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    out.residual[i] =
        trace[i] - out.trend_offset - out.trend_amplitude * std::exp(-T_fs[i] / out.trend_tau_fs);

  std::vector<double> windowed(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double hann =
        0.5 * (1.0 - std::cos(units::two_pi * static_cast<double>(i) / static_cast<double>(n - 1)));
    windowed[i] = hann * out.residual[i];
  }

  const std::size_t m = static_cast<std::size_t>(pad) * n;
  const std::size_t half = m / 2;
  out.nu_cm1.resize(half + 1);
  out.magnitude.resize(half + 1);
  for (std::size_t k = 0; k <= half; ++k) {
    Complex acc{0.0, 0.0};
    for (std::size_t j = 0; j < n; ++j)
      acc += windowed[j] * std::exp(-ii * units::two_pi * static_cast<double>(k * j) /
                                    static_cast<double>(m));
    out.nu_cm1[k] = static_cast<double>(k) /
                    (static_cast<double>(m) * dT * units::c_cm_per_fs);
    out.magnitude[k] = std::abs(acc);
  }

  std::size_t k0 = half + 1;
  for (std::size_t k = 0; k <= half; ++k)
    if (out.nu_cm1[k] >= min_nu_cm1) {
      k0 = k;
      break;
    }
  if (k0 > half) throw ConfigError("beating_spectrum: no bins above the minimum frequency");
  std::size_t kp = k0;
  for (std::size_t k = k0; k <= half; ++k)
    if (out.magnitude[k] > out.magnitude[kp]) kp = k;
  out.peak_magnitude = out.magnitude[kp];
  out.peak_nu_cm1 = out.nu_cm1[kp];
  if (kp > 0 && kp < half) {
    // sub-bin refinement by parabolic interpolation through the peak triplet
    const double ym = out.magnitude[kp - 1], y0 = out.magnitude[kp], yp = out.magnitude[kp + 1];
    const double denom = ym - 2.0 * y0 + yp;
    if (std::abs(denom) > 0.0) {
      const double shift = 0.5 * (ym - yp) / denom;
      if (std::abs(shift) <= 1.0)
        out.peak_nu_cm1 += shift * (out.nu_cm1[1] - out.nu_cm1[0]);
    }
  }
  std::vector<double> band(out.magnitude.begin() + static_cast<std::ptrdiff_t>(k0),
                           out.magnitude.end());
  std::nth_element(band.begin(), band.begin() + static_cast<std::ptrdiff_t>(band.size() / 2),
                   band.end());
  const double med = band[band.size() / 2];
  out.peak_to_median = med > 0.0 ? out.peak_magnitude / med : 0.0;
  return out;
}

}  // namespace twodes
