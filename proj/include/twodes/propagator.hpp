// propagator.hpp - fixed-step RK4 block propagation over precomputed generators
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "twodes/dissipator.hpp"
#include "twodes/errors.hpp"
#include "twodes/linalg.hpp"

namespace twodes {

// Full Liouvillian (coherent diagonal plus dissipator) sampled on the
// half-step grid of one protocol segment: index 2k is the start of step k,
// 2k+1 its midpoint. RK4 then never needs an off-grid kernel value.
struct SegmentGenerators {
  double dt_fs = 0.0;
  std::vector<Matrix16c> l;

  std::size_t steps() const { return l.empty() ? 0 : (l.size() - 1) / 2; }
};

inline SegmentGenerators build_segment_generators(const SegmentDissipator& sd, double dt_fs,
                                                  std::size_t n_steps) {
  if (!(dt_fs > 0.0)) throw std::invalid_argument("build_segment_generators: dt_fs must be > 0");
  SegmentGenerators gens;
  gens.dt_fs = dt_fs;
  gens.l.resize(2 * n_steps + 1);
  const Matrix4c& a0 = sd.table().coupling_operator();
  const Vector16c hd = hamiltonian_diagonal(sd.energies());
  for (std::size_t k = 0; k < gens.l.size(); ++k) {
    const double tau = 0.5 * dt_fs * static_cast<double>(k);
    gens.l[k] = liouville_generator(sd.lambda_at(tau), a0);
    gens.l[k].diagonal() += hd;
  }
  return gens;
}

// Classic RK4 on a 16 x m block of column-stacked states. on_step(k, block)
// fires with the state after k steps, including k = 0 before any stepping.
template <typename OnStep>
void propagate_block(Block16c& block, const SegmentGenerators& gens, OnStep&& on_step,
                     const char* what = "propagate_block") {
  const std::size_t n = gens.steps();
  const double h = gens.dt_fs;
  Block16c k1(16, block.cols()), k2(16, block.cols()), k3(16, block.cols()),
      k4(16, block.cols()), tmp(16, block.cols());
  on_step(static_cast<std::size_t>(0), block);
  for (std::size_t s = 0; s < n; ++s) {
    const Matrix16c& l0 = gens.l[2 * s];
    const Matrix16c& lm = gens.l[2 * s + 1];
    const Matrix16c& l1 = gens.l[2 * s + 2];
    k1.noalias() = l0 * block;
    tmp = block + (0.5 * h) * k1;
    k2.noalias() = lm * tmp;
    tmp = block + (0.5 * h) * k2;
    k3.noalias() = lm * tmp;
    tmp = block + h * k3;
    k4.noalias() = l1 * tmp;
    block += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!block.allFinite())
      throw NumericalError(std::string(what) + ": non-finite state at segment time " +
                           std::to_string(h * static_cast<double>(s + 1)) + " fs");
    on_step(s + 1, block);
  }
}

// Linear switched interaction, rho - i * amplitude * [mu, rho]. Exactly linear
// in the amplitude, so inclusion-exclusion over switch patterns isolates the
// product term with no higher-order contamination.
inline Matrix4c apply_switch(const Matrix4c& rho, const Matrix4c& mu, double amplitude) {
  return rho - ii * amplitude * (mu * rho - rho * mu);
}

// Physical pulse action for trajectory diagnostics; keeps Hermiticity exactly.
inline Matrix4c apply_pulse_unitary(const Matrix4c& rho, const Matrix4c& u) {
  return u * rho * u.adjoint();
}

}  // namespace twodes
