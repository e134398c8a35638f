// exciton.hpp - Frenkel dimer: site Hamiltonian, exciton basis, dipoles, thermal state
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "twodes/errors.hpp"
#include "twodes/linalg.hpp"
#include "twodes/units.hpp"

namespace twodes {

// Two-site, four-level model. Basis ordering everywhere: {|g>, |e1>, |e2>, |f>},
// i.e. site occupations {|00>, |10>, |01>, |11>}.
struct DimerParams {
  double eps1_cm1 = 0.0;
  double eps2_cm1 = 0.0;
  double coupling_cm1 = 0.0;
  double mu1 = 0.0;
  double mu2 = 0.0;
  double temperature_K = 0.0;
  // Scales the |e>->|f> dipole couplings of the harmonic ladder convention
  // <f|mu+|e1> = mu2, <f|mu+|e2> = mu1; set to 0 to switch off excited-state
  // absorption entirely.
  double f_dipole_scale = 1.0;

  void validate() const {
    if (!std::isfinite(eps1_cm1) || !std::isfinite(eps2_cm1) || !std::isfinite(coupling_cm1) ||
        !std::isfinite(mu1) || !std::isfinite(mu2) || !std::isfinite(f_dipole_scale))
      throw ConfigError("DimerParams: non-finite entry");
    if (!(temperature_K > 0.0))
      throw ConfigError("DimerParams: temperature_K must be > 0, got " +
                        std::to_string(temperature_K));
  }
};

// Single-exciton eigenbasis. Labels are energy ordered (E1 <= E2); U holds the
// eigenvectors of the 2x2 single-exciton block as columns (site components),
// with deterministic signs fixed by starting from the proper rotation
// [[cos t, -sin t], [sin t, cos t]] and swapping columns when needed for the
// energy ordering.
struct ExcitonBasis {
  double E1_cm1 = 0.0;
  double E2_cm1 = 0.0;
  double splitting_cm1 = 0.0;  // E2 - E1 = sqrt((eps1-eps2)^2 + 4 J^2)
  double theta_rad = 0.0;      // mixing angle, atan(2J / (eps1 - eps2)) / 2, in (-pi/4, pi/4]
  double carrier_cm1 = 0.0;    // (E1 + E2) / 2, the rotating-frame carrier
  Eigen::Matrix2d U = Eigen::Matrix2d::Identity();
};

inline Eigen::Matrix4d build_site_hamiltonian(const DimerParams& p) {
  Eigen::Matrix4d h = Eigen::Matrix4d::Zero();
  h(1, 1) = p.eps1_cm1;
  h(2, 2) = p.eps2_cm1;
  h(3, 3) = p.eps1_cm1 + p.eps2_cm1;
  h(1, 2) = h(2, 1) = p.coupling_cm1;
  return h;
}

inline ExcitonBasis diagonalize_dimer(const DimerParams& p) {
  const double a = p.eps1_cm1;
  const double b = p.eps2_cm1;
  const double j = p.coupling_cm1;
  const double delta = std::sqrt((a - b) * (a - b) + 4.0 * j * j);
  if (delta == 0.0)
    throw ConfigError("diagonalize_dimer: degenerate sites with zero coupling are unsupported");

  ExcitonBasis x;
  x.theta_rad = (a == b) ? units::pi / 4.0 : 0.5 * std::atan(2.0 * j / (a - b));
  x.splitting_cm1 = delta;

  const double ct = std::cos(x.theta_rad);
  const double st = std::sin(x.theta_rad);
  // Column (ct, st) is the eigenvector continuously connected to site 1; its
  // eigenvalue sits above or below the mean depending on the detuning sign.
  const double mean = 0.5 * (a + b);
  const double e_site1 = mean + 0.5 * (a - b) * std::cos(2.0 * x.theta_rad) +
                         j * std::sin(2.0 * x.theta_rad);
  const double e_site2 = 2.0 * mean - e_site1;

  Eigen::Vector2d v1(ct, st), v2(-st, ct);
  if (e_site1 <= e_site2) {
    x.E1_cm1 = e_site1;
    x.E2_cm1 = e_site2;
    x.U.col(0) = v1;
    x.U.col(1) = v2;
  } else {
    x.E1_cm1 = e_site2;
    x.E2_cm1 = e_site1;
    x.U.col(0) = v2;
    x.U.col(1) = v1;
  }
  x.carrier_cm1 = 0.5 * (x.E1_cm1 + x.E2_cm1);

  const Eigen::Matrix2d block = (Eigen::Matrix2d() << a, j, j, b).finished();
  const Eigen::Matrix2d d = x.U.transpose() * block * x.U;
  if (std::abs(d(0, 1)) > 1e-10 || std::abs(d(1, 0)) > 1e-10)
    throw NumericalError("diagonalize_dimer: residual off-diagonal " + std::to_string(d(0, 1)));
  return x;
}

// 4x4 embedding of the exciton rotation: maps exciton-basis coordinates to
// site-basis coordinates (|g> and |f> are shared by both bases).
inline Eigen::Matrix4d embed_rotation(const ExcitonBasis& x) {
  Eigen::Matrix4d r = Eigen::Matrix4d::Identity();
  r.block<2, 2>(1, 1) = x.U;
  return r;
}

// Difference-bath coupling operator in the exciton basis: U^dag sigma_z U on
// the single-exciton block, zero on |g> and |f>.
inline Matrix4c build_coupling_operator(const ExcitonBasis& x) {
  const Eigen::Matrix2d sz = (Eigen::Matrix2d() << 1.0, 0.0, 0.0, -1.0).finished();
  const Eigen::Matrix2d block = x.U.transpose() * sz * x.U;
  Matrix4c a0 = Matrix4c::Zero();
  a0.block<2, 2>(1, 1) = block.cast<Complex>();
  return a0;
}

struct DipoleOperators {
  Matrix4c mu_plus;   // raising part: promotes g->e, e->f
  Matrix4c mu_minus;  // mu_plus^dag
  Matrix4c mu;        // mu_plus + mu_minus
};

inline DipoleOperators build_dipole_operators(const DimerParams& p, const ExcitonBasis& x) {
  Eigen::Matrix4d up = Eigen::Matrix4d::Zero();
  up(1, 0) = p.mu1;
  up(2, 0) = p.mu2;
  up(3, 1) = p.f_dipole_scale * p.mu2;
  up(3, 2) = p.f_dipole_scale * p.mu1;
  const Eigen::Matrix4d r = embed_rotation(x);
  const Eigen::Matrix4d up_exc = r.transpose() * up * r;

  DipoleOperators d;
  d.mu_plus = up_exc.cast<Complex>();
  d.mu_minus = d.mu_plus.adjoint();
  d.mu = d.mu_plus + d.mu_minus;
  return d;
}

// exp(-beta H) / Z with the exponent formed in cm^-1 units (beta_cm in 1/cm^-1).
inline Matrix4c thermal_state_beta(const Eigen::Matrix4d& h_cm1, double beta_cm) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(h_cm1);
  Eigen::Vector4d w = (-beta_cm * (es.eigenvalues().array() - es.eigenvalues().minCoeff())).exp();
  w /= w.sum();
  const Eigen::Matrix4d rho = es.eigenvectors() * w.asDiagonal() * es.eigenvectors().transpose();
  return rho.cast<Complex>();
}

inline Matrix4c thermal_state(const DimerParams& p, const Eigen::Matrix4d& h_cm1) {
  p.validate();
  return thermal_state_beta(h_cm1, 1.0 / units::thermal_energy_cm1(p.temperature_K));
}

// Everything downstream propagation needs, assembled once. All operators are
// in the exciton basis; energies are rotating-frame angular frequencies.
struct ExcitonModel {
  DimerParams params;
  ExcitonBasis basis;
  Eigen::Matrix4d h_site_cm1;
  Eigen::Vector4d h_rot_rad_fs;  // diag(0, -delta/2, +delta/2, 0)
  Matrix4c a0;
  DipoleOperators dipoles;
  Matrix4c rho0;                 // thermal state, exciton basis
  double carrier_rad_fs = 0.0;

  Matrix4c to_site_basis(const Matrix4c& op_exciton) const {
    const Eigen::Matrix4d r = embed_rotation(basis);
    return r.cast<Complex>() * op_exciton * r.transpose().cast<Complex>();
  }
};

inline ExcitonModel build_exciton_model(const DimerParams& p) {
  p.validate();
  ExcitonModel m;
  m.params = p;
  m.basis = diagonalize_dimer(p);
  m.h_site_cm1 = build_site_hamiltonian(p);
  const double half_split = 0.5 * units::cm1_to_rad_fs(m.basis.splitting_cm1);
  m.h_rot_rad_fs << 0.0, -half_split, half_split, 0.0;
  m.a0 = build_coupling_operator(m.basis);
  m.dipoles = build_dipole_operators(p, m.basis);
  const Eigen::Matrix4d r = embed_rotation(m.basis);
  const Matrix4c rho_site = thermal_state(p, m.h_site_cm1);
  m.rho0 = r.transpose().cast<Complex>() * rho_site * r.cast<Complex>();
  m.carrier_rad_fs = units::cm1_to_rad_fs(m.basis.carrier_cm1);
  return m;
}

}  // namespace twodes
