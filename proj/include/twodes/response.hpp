// response.hpp - switched three-pulse protocol and third-order response extraction
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "twodes/dissipator.hpp"
#include "twodes/errors.hpp"
#include "twodes/exciton.hpp"
#include "twodes/linalg.hpp"
#include "twodes/propagator.hpp"
#include "twodes/threadpool.hpp"

namespace twodes {

struct ResponseOptions {
  DynamicsMode mode = DynamicsMode::CorrelationAware;
  SegmentVariant variant = SegmentVariant::AsPrinted;
  double switch_amplitude = 0.01;    // strength of the linear switched interactions
  double dressing_amplitude = 0.01;  // strength of the kernel-dressing pulse unitary
  double dt_fs = 0.5;
  int threads = 1;
};

struct ResponseGrids {
  std::vector<double> t1_fs;
  std::vector<double> t3_fs;
  std::vector<double> T_fs;
};

// Extracted third-order response per phase-matched channel, one (t1, t3)
// panel per waiting time.
struct ResponseScan {
  std::vector<double> t1_fs, t3_fs, T_fs;
  std::vector<Eigen::MatrixXcd> rephasing;
  std::vector<Eigen::MatrixXcd> nonrephasing;
};

namespace detail {

inline std::size_t step_of(double t_fs, double dt_fs, const char* what) {
  const double x = t_fs / dt_fs;
  const auto idx = static_cast<long long>(std::llround(x));
  if (idx < 0 || std::abs(x - static_cast<double>(idx)) > 1e-6)
    throw ConfigError(std::string(what) + ": time " + std::to_string(t_fs) +
                      " fs is not a nonnegative multiple of dt = " + std::to_string(dt_fs));
  return static_cast<std::size_t>(idx);
}

inline void validate_grid(const std::vector<double>& grid, double dt_fs, const char* what) {
  if (grid.empty()) throw ConfigError(std::string(what) + ": grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    step_of(grid[i], dt_fs, what);
    if (i > 0 && !(grid[i] > grid[i - 1]))
      throw ConfigError(std::string(what) + ": grid must be strictly increasing");
  }
}

inline RowVector16c detection_row(const Matrix4c& mu_minus) {
  RowVector16c w;
  for (int l = 0; l < 4; ++l)
    for (int k = 0; k < 4; ++k) w(k + 4 * l) = mu_minus(l, k);
  return w;
}

}  // namespace detail

// Propagates the switched protocol over all (t1, T) cells and extracts the
// third-order response by inclusion-exclusion over the eight switch patterns
// per channel. Switch maps are linear in the amplitude, so the alternating sum
// isolates the triple-switch term exactly and the division by amplitude^3 is
// free of higher-order contamination.
inline ResponseScan scan_waiting_times(const ExcitonModel& model, const DissipatorTable& table,
                                       const ResponseGrids& grids, const ResponseOptions& opt) {
  const double dt = opt.dt_fs;
  if (!(dt > 0.0)) throw ConfigError("scan_waiting_times: dt_fs must be > 0");
  if (!(opt.switch_amplitude > 0.0))
    throw ConfigError("scan_waiting_times: switch_amplitude must be > 0");
  detail::validate_grid(grids.t1_fs, dt, "scan_waiting_times: t1");
  detail::validate_grid(grids.t3_fs, dt, "scan_waiting_times: t3");
  detail::validate_grid(grids.T_fs, dt, "scan_waiting_times: T");
  if (std::abs(table.spacing_fs() - 0.5 * dt) > 1e-9)
    throw std::invalid_argument("scan_waiting_times: kernel table spacing must equal dt/2");
  const double span_needed = grids.t1_fs.back() + grids.T_fs.back() + grids.t3_fs.back();
  if (table.span_fs() < span_needed - 1e-9)
    throw std::invalid_argument("scan_waiting_times: kernel table span " +
                                std::to_string(table.span_fs()) + " fs ends before " +
                                std::to_string(span_needed) + " fs");

  const std::size_t n1 = grids.t1_fs.size();
  const std::size_t n3 = grids.t3_fs.size();
  const std::size_t nT = grids.T_fs.size();
  const Matrix4c u_c = dressing_unitary(model.dipoles.mu, opt.dressing_amplitude);
  const Eigen::Vector4d energies = model.h_rot_rad_fs;
  const Matrix4c& mu_p = model.dipoles.mu_plus;
  const Matrix4c& mu_m = model.dipoles.mu_minus;
  const double eps = opt.switch_amplitude;
  const RowVector16c detect = detail::detection_row(mu_m);
  // Response normalization: the alternating sum carries (-i eps)^3 from the
  // three switch commutators; the channel response is -(-i)^3 * sum / eps^3.
  const Complex extract = -ii / (eps * eps * eps);

  ResponseScan scan;
  scan.t1_fs = grids.t1_fs;
  scan.t3_fs = grids.t3_fs;
  scan.T_fs = grids.T_fs;
  scan.rephasing.assign(nT, Eigen::MatrixXcd::Zero(n1, n3));
  scan.nonrephasing.assign(nT, Eigen::MatrixXcd::Zero(n1, n3));

  SegmentDissipator seed(table, energies, u_c, opt.mode, opt.variant);

  // Coherence segment: the bare start plus one switched start per channel
  // evolve together; every t1 gridpoint is captured in a single pass.
  std::vector<std::size_t> t1_steps(n1), t3_steps(n3), T_steps(nT);
  for (std::size_t i = 0; i < n1; ++i)
    t1_steps[i] = detail::step_of(grids.t1_fs[i], dt, "scan_waiting_times: t1");
  for (std::size_t i = 0; i < n3; ++i)
    t3_steps[i] = detail::step_of(grids.t3_fs[i], dt, "scan_waiting_times: t3");
  for (std::size_t i = 0; i < nT; ++i)
    T_steps[i] = detail::step_of(grids.T_fs[i], dt, "scan_waiting_times: T");

  const SegmentGenerators gens1 = build_segment_generators(seed, dt, t1_steps.back());
  Block16c first(16, 3);
  first.col(0) = vec(model.rho0);
  first.col(1) = vec(apply_switch(model.rho0, mu_m, eps));
  first.col(2) = vec(apply_switch(model.rho0, mu_p, eps));
  std::vector<Eigen::Matrix<Complex, 16, 3>> coherence_snaps(n1);
  {
    std::size_t cursor = 0;
    propagate_block(
        first, gens1,
        [&](std::size_t step, const Block16c& b) {
          if (cursor < n1 && step == t1_steps[cursor]) coherence_snaps[cursor++] = b;
        },
        "coherence segment");
  }

  // With no cross-boundary memory the later segments see the same generator
  // sequence for every (t1, T) cell, so it is built once and shared.
  SegmentGenerators shared2, shared3;
  if (opt.mode != DynamicsMode::CorrelationAware) {
    shared2 = build_segment_generators(seed, dt, T_steps.back());
    shared3 = build_segment_generators(seed, dt, t3_steps.back());
  }

  parallel_for(n1, opt.threads, [&](std::size_t i1) {
    SegmentDissipator sd = seed;
    const double t1 = grids.t1_fs[i1];

    Matrix4c s0 = unvec(Vector16c(coherence_snaps[i1].col(0)));
    Matrix4c s1 = unvec(Vector16c(coherence_snaps[i1].col(1)));
    Matrix4c s2 = unvec(Vector16c(coherence_snaps[i1].col(2)));
    Block16c waiting(16, 7);
    waiting.col(0) = vec(s0);                            // both channels, no switches yet
    waiting.col(1) = vec(apply_switch(s0, mu_p, eps));   // rephasing (0,1)
    waiting.col(2) = vec(s1);                            // rephasing (1,0)
    waiting.col(3) = vec(apply_switch(s1, mu_p, eps));   // rephasing (1,1)
    waiting.col(4) = vec(apply_switch(s0, mu_m, eps));   // nonrephasing (0,1)
    waiting.col(5) = vec(s2);                            // nonrephasing (1,0)
    waiting.col(6) = vec(apply_switch(s2, mu_m, eps));   // nonrephasing (1,1)

    SegmentGenerators local2;
    if (opt.mode == DynamicsMode::CorrelationAware) {
      sd.begin_waiting(t1);
      local2 = build_segment_generators(sd, dt, T_steps.back());
    }
    const SegmentGenerators& gens2 =
        opt.mode == DynamicsMode::CorrelationAware ? local2 : shared2;

    std::vector<Eigen::Matrix<Complex, 16, 7>> waiting_snaps(nT);
    {
      std::size_t cursor = 0;
      propagate_block(
          waiting, gens2,
          [&](std::size_t step, const Block16c& b) {
            if (cursor < nT && step == T_steps[cursor]) waiting_snaps[cursor++] = b;
          },
          "waiting segment");
    }

    for (std::size_t m = 0; m < nT; ++m) {
      Block16c detection(16, 14);
      for (int j = 0; j < 7; ++j) {
        const Matrix4c rho_j = unvec(Vector16c(waiting_snaps[m].col(j)));
        detection.col(2 * j) = vec(rho_j);
        detection.col(2 * j + 1) = vec(apply_switch(rho_j, mu_p, eps));
      }

      SegmentGenerators local3;
      if (opt.mode == DynamicsMode::CorrelationAware) {
        sd.begin_detection(t1, grids.T_fs[m]);
        local3 = build_segment_generators(sd, dt, t3_steps.back());
      }
      const SegmentGenerators& gens3 =
          opt.mode == DynamicsMode::CorrelationAware ? local3 : shared3;

      Eigen::MatrixXcd& rp = scan.rephasing[m];
      Eigen::MatrixXcd& nr = scan.nonrephasing[m];
      std::size_t cursor = 0;
      propagate_block(
          detection, gens3,
          [&](std::size_t step, const Block16c& b) {
            if (cursor < n3 && step == t3_steps[cursor]) {
              const Eigen::Matrix<Complex, 1, Eigen::Dynamic> tr = detect * b;
              rp(i1, cursor) = extract * (tr(7) - tr(6) - tr(5) - tr(3) + tr(4) + tr(2) +
                                          tr(1) - tr(0));
              nr(i1, cursor) = extract * (tr(13) - tr(12) - tr(11) - tr(9) + tr(10) + tr(8) +
                                          tr(1) - tr(0));
              ++cursor;
            }
          },
          "detection segment");
    }
  });
  return scan;
}

// One realization of the protocol with the three switched interactions
// replaced by genuine pulse unitaries at the switch amplitude, recorded at
// every integrator step. The segment kernels stay dressed by the full pulse.
// Used by the positivity and conservation monitors, which need honest
// density matrices.
struct PhysicalTrajectory {
  std::vector<double> t_fs;
  std::vector<Matrix4c> rho;
};

inline PhysicalTrajectory run_physical_protocol(const ExcitonModel& model,
                                                const DissipatorTable& table,
                                                const ResponseOptions& opt, double t1_fs,
                                                double t2_fs, double t3_fs) {
  const double dt = opt.dt_fs;
  const std::size_t n1 = detail::step_of(t1_fs, dt, "run_physical_protocol: t1");
  const std::size_t n2 = detail::step_of(t2_fs, dt, "run_physical_protocol: t2");
  const std::size_t n3 = detail::step_of(t3_fs, dt, "run_physical_protocol: t3");
  const Matrix4c u_c = dressing_unitary(model.dipoles.mu, opt.dressing_amplitude);
  const Matrix4c u_p = dressing_unitary(model.dipoles.mu, opt.switch_amplitude);
  SegmentDissipator sd(table, model.h_rot_rad_fs, u_c, opt.mode, opt.variant);

  PhysicalTrajectory traj;
  traj.t_fs.reserve(n1 + n2 + n3 + 4);
  traj.rho.reserve(n1 + n2 + n3 + 4);
  auto record = [&](double t, const Matrix4c& r) {
    traj.t_fs.push_back(t);
    traj.rho.push_back(r);
  };

  record(0.0, model.rho0);
  Matrix4c rho = apply_pulse_unitary(model.rho0, u_p);
  double t0 = 0.0;
  auto run_segment = [&](std::size_t steps, const char* what) {
    Block16c b(16, 1);
    b.col(0) = vec(rho);
    const SegmentGenerators gens = build_segment_generators(sd, dt, steps);
    propagate_block(
        b, gens,
        [&](std::size_t step, const Block16c& blk) {
          record(t0 + dt * static_cast<double>(step), unvec(Vector16c(blk.col(0))));
        },
        what);
    rho = unvec(Vector16c(b.col(0)));
    t0 += dt * static_cast<double>(steps);
  };

  sd.begin_coherence();
  run_segment(n1, "coherence segment");
  rho = apply_pulse_unitary(rho, u_p);
  sd.begin_waiting(t1_fs);
  run_segment(n2, "waiting segment");
  rho = apply_pulse_unitary(rho, u_p);
  sd.begin_detection(t1_fs, t2_fs);
  run_segment(n3, "detection segment");
  return traj;
}

}  // namespace twodes
