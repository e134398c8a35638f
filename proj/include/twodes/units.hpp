// units.hpp - unit conversions; hbar = 1, times in fs, internal energies in rad/fs
#pragma once

#include <cmath>
#include <string>

#include "twodes/errors.hpp"

namespace twodes::units {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

// CODATA speed of light, expressed in cm/fs so that omega = 2*pi*c*nu maps
// wavenumbers (cm^-1) straight to angular frequencies (rad/fs).
inline constexpr double c_cm_per_fs = 2.99792458e-5;

// Boltzmann constant in cm^-1 per kelvin.
inline constexpr double k_boltzmann_cm1_per_K = 0.6950348;

inline double cm1_to_rad_fs(double nu_cm1) { return two_pi * c_cm_per_fs * nu_cm1; }

inline double rad_fs_to_cm1(double omega_rad_fs) { return omega_rad_fs / (two_pi * c_cm_per_fs); }

// Thermal energy of a bath at the given temperature, in cm^-1.
inline double thermal_energy_cm1(double temperature_K) {
  if (!(temperature_K > 0.0))
    throw ConfigError("thermal_energy_cm1: temperature must be > 0 K, got " +
                      std::to_string(temperature_K));
  return k_boltzmann_cm1_per_K * temperature_K;
}

// Inverse temperature in fs (the reciprocal of k_B T expressed in rad/fs),
// so that beta * omega is dimensionless for omega in rad/fs.
inline double thermal_beta_fs(double temperature_K) {
  return 1.0 / cm1_to_rad_fs(thermal_energy_cm1(temperature_K));
}

}  // namespace twodes::units
