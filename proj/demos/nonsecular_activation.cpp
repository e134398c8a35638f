// nonsecular_activation.cpp - how pulse dressing turns bath memory into population-coherence transfer
#include <cstdio>

#include "twodes/bath.hpp"
#include "twodes/config.hpp"
#include "twodes/dissipator.hpp"
#include "twodes/exciton.hpp"
#include "twodes/linalg.hpp"
#include "twodes/propagator.hpp"
#include "twodes/units.hpp"

namespace {

// Largest generator element feeding a coherence row from a population column,
// relative to the largest element overall.
double pop_to_coh_ratio(const twodes::Matrix16c& g) {
  auto is_pop = [](int k) { return k == 0 || k == 5 || k == 10 || k == 15; };
  double block = 0.0, all = 0.0;
  for (int r = 0; r < 16; ++r)
    for (int c = 0; c < 16; ++c) {
      const double v = std::abs(g(r, c));
      all = std::max(all, v);
      if (!is_pop(r) && is_pop(c)) block = std::max(block, v);
    }
  return block / all;
}

}  // namespace

int main() {
  using namespace twodes;

  RunConfig cfg = preset_config("fig2");
  cfg.bath.lambda = 0.143417;
  cfg.bath_lambda_auto = false;

  const ExcitonModel model = build_exciton_model(cfg.dimer);
  const double beta_fs = units::thermal_beta_fs(cfg.dimer.temperature_K);
  const double half = 0.5 * cfg.dt_fs;
  const auto steps = static_cast<std::size_t>(1200.0 / half + 0.5);
  const BathCorrelation corr = bath_correlation(cfg.bath, beta_fs, half, steps, 1);
  const DissipatorTable table(corr, model.a0,
                              units::cm1_to_rad_fs(model.basis.splitting_cm1));

  // Waiting segment entered 100 fs after the first pulse, with the kernel
  // either dressed by the order-unity pulse or left undressed. The memory
  // fraction is the norm share of the cross-boundary kernel part; the feeding
  // ratio is the population-to-coherence block of the full generator.
  for (double amp : {0.0, cfg.dressing_amplitude}) {
    const Matrix4c u_c = dressing_unitary(model.dipoles.mu, amp);
    SegmentDissipator sd(table, model.h_rot_rad_fs, u_c, DynamicsMode::CorrelationAware,
                         cfg.variant);
    sd.begin_waiting(100.0);
    std::printf("dressing amplitude %.2f\n", amp);
    std::printf("  %8s %16s %16s\n", "tau/fs", "memory fraction", "pop->coh ratio");
    const Vector16c hdiag = hamiltonian_diagonal(model.h_rot_rad_fs);
    for (double tau : {0.0, 50.0, 100.0, 200.0, 400.0, 800.0}) {
      const Matrix4c lam = sd.lambda_at(tau);
      const double mem = fro_norm(sd.lambda_memory(tau)) / fro_norm(lam);
      Matrix16c g = liouville_generator(lam, model.a0);
      for (int k = 0; k < 16; ++k) g(k, k) += hdiag(k);
      std::printf("  %8.0f %16.4f %16.6f\n", tau, mem, pop_to_coh_ratio(g));
    }
  }
  std::printf("undressed kernels keep the feeding at the bare nonsecular level;\n"
              "dressed kernels add transfer that lives as long as the memory fraction.\n");
  return 0;
}
