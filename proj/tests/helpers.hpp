// helpers.hpp - shared fixtures for the test suite
#pragma once

#include <random>

#include "twodes/bath.hpp"
#include "twodes/exciton.hpp"
#include "twodes/linalg.hpp"
#include "twodes/units.hpp"

namespace twodes::testing {

inline DimerParams reference_dimer() {
  DimerParams p;
  p.eps1_cm1 = 12410.0;
  p.eps2_cm1 = 12210.0;
  p.coupling_cm1 = 5.5;
  p.mu1 = 1.0;
  p.mu2 = -0.8;
  p.temperature_K = 77.0;
  return p;
}

inline const ExcitonModel& reference_model() {
  static const ExcitonModel model = build_exciton_model(reference_dimer());
  return model;
}

// One moderately long Ohmic correlation grid shared by the bath-level tests.
inline const BathCorrelation& shared_ohmic_correlation() {
  static const BathCorrelation corr = [] {
    const SpectralDensity sd = SpectralDensity::power_law(0.2, 1.0, 0.01);
    return bath_correlation(sd, units::thermal_beta_fs(77.0), 0.5, 3000, 1);
  }();
  return corr;
}

inline Matrix4c random_hermitian(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix4c m;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) m(r, c) = Complex{u(rng), u(rng)};
  return 0.5 * (m + m.adjoint().eval());
}

inline Matrix4c random_density(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix4c m;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) m(r, c) = Complex{u(rng), u(rng)};
  Matrix4c rho = m * m.adjoint();
  return rho / rho.trace();
}

}  // namespace twodes::testing
