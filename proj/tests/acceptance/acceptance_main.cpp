// acceptance_main.cpp - one verdict line per headline claim and numeric guarantee
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iterator>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "twodes/pipeline.hpp"

using namespace twodes;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& what) {
  std::printf("[%s] criterion %2d: %s\n", ok ? "PASS" : "FAIL", id, what.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

void info(const std::string& what) {
  std::printf("[info] %s\n", what.c_str());
  std::fflush(stdout);
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

double rms(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s / static_cast<double>(x.size()));
}

Matrix4c commutator(const Matrix4c& a, const Matrix4c& b) { return a * b - b * a; }

// Largest element feeding a coherence row from a population column, relative
// to the largest element of the whole generator.
double pop_to_coh_ratio(const Matrix16c& g) {
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

struct PresetRun {
  std::string name;
  SimulateResult res;
  double wall_s = 0.0;
};

}  // namespace

int main() {
  const int threads = std::max(1u, std::thread::hardware_concurrency());
  info("acceptance gate on " + std::to_string(threads) + " thread(s)");

  // Shared exciton model and pinned beating target: the dimer splitting.
  const ExcitonModel model = build_exciton_model(preset_config("fig2").dimer);
  const double split_cm1 = model.basis.splitting_cm1;

  std::vector<PresetRun> runs;
  for (const char* name : {"fig2", "fig3", "fig4", "fig5"}) {
    info(std::string("running preset ") + name + " ...");
    PresetRun run;
    run.name = name;
    const auto t0 = std::chrono::steady_clock::now();
    run.res = run_simulate(preset_config(name), std::string("acceptance_artifacts/") + name,
                           threads);
    run.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    info(std::string(name) + ": lambda=" + fmt(run.res.cfg.bath.lambda) +
         " peak=" + fmt(run.res.beating.peak_nu_cm1) + " cm^-1" +
         " peak_to_median=" + fmt(run.res.beating.peak_to_median) +
         " min_pt=" + fmt(run.res.min_pt_eigenvalue) + " wall=" + fmt(run.wall_s) + " s");
    runs.push_back(std::move(run));
  }
  const SimulateResult& f2 = runs[0].res;
  const SimulateResult& f3 = runs[1].res;
  const SimulateResult& f4 = runs[2].res;
  const SimulateResult& f5 = runs[3].res;

  // 1. Memory-bearing run beats at the exciton splitting.
  {
    const bool ok = f2.has_beating && std::abs(f2.beating.peak_nu_cm1 - split_cm1) <= 15.0;
    report(1, ok,
           "fig2 beating peak " + fmt(f2.beating.peak_nu_cm1) + " cm^-1 within " +
               fmt(split_cm1) + " +/- 15 (wall " + fmt(runs[0].wall_s) + " s on " +
               std::to_string(threads) + " thread(s); target 600 s on 8)");
  }

  // 2. Beating persists: late-window residual keeps >= 25% of the early RMS.
  {
    std::vector<double> early, late;
    for (std::size_t k = 0; k < f2.T_fs.size(); ++k) {
      if (f2.T_fs[k] < 200.0) early.push_back(f2.beating.residual[k]);
      if (f2.T_fs[k] >= 600.0 && f2.T_fs[k] <= 1000.0) late.push_back(f2.beating.residual[k]);
    }
    const double e = rms(early), l = rms(late);
    const bool ok = e > 0.0 && l >= 0.25 * e;
    report(2, ok,
           "fig2 residual RMS(600..1000 fs) " + fmt(l) + " vs 0.25 * RMS(<200 fs) " +
               fmt(0.25 * e));
  }

  // 3. Both suppressed references lose at least half the prominence.
  {
    const double p2 = f2.beating.peak_to_median;
    const double p3 = f3.beating.peak_to_median;
    const double p4 = f4.beating.peak_to_median;
    const bool ok = p2 >= 2.0 * p3 && p2 >= 2.0 * p4;
    report(3, ok,
           "fig2 peak_to_median " + fmt(p2) + " vs 2x fig3 " + fmt(2.0 * p3) + " and 2x fig4 " +
               fmt(2.0 * p4));
  }

  // 4. Structured slow tail restores the beat the Ohmic bath lost.
  {
    const bool ok = std::abs(f5.beating.peak_nu_cm1 - split_cm1) <= 20.0 &&
                    f5.beating.peak_to_median >= 2.0 * f3.beating.peak_to_median;
    report(4, ok,
           "fig5 peak " + fmt(f5.beating.peak_nu_cm1) + " cm^-1 within " + fmt(split_cm1) +
               " +/- 20, peak_to_median " + fmt(f5.beating.peak_to_median) + " vs 2x fig3 " +
               fmt(2.0 * f3.beating.peak_to_median));
  }

  // Shared fig2-bath kernel table spanning t1 + t3 for criteria 5 and 8.
  const RunConfig cfg2 = f2.cfg;
  const std::vector<double> t1g = cfg2.t1_grid();
  const std::vector<double> t3g = cfg2.t3_grid();
  const double beta_fs = units::thermal_beta_fs(cfg2.dimer.temperature_K);
  const double half = 0.5 * cfg2.dt_fs;
  const double span5 = t1g.back() + t3g.back();
  const BathCorrelation corr5 = bath_correlation(
      cfg2.bath, beta_fs, half, static_cast<std::size_t>(std::llround(span5 / half)), threads);
  const DissipatorTable table5(corr5, model.a0,
                               units::cm1_to_rad_fs(model.basis.splitting_cm1));

  // 5. Halving the switch amplitude leaves the extracted third order fixed.
  {
    info("running criterion 5 sweeps ...");
    ResponseOptions opt;
    opt.mode = cfg2.mode;
    opt.variant = cfg2.variant;
    opt.switch_amplitude = cfg2.pulse_amplitude;
    opt.dressing_amplitude = cfg2.dressing_amplitude;
    opt.dt_fs = cfg2.dt_fs;
    opt.threads = threads;
    const ResponseGrids grids{t1g, t3g, {0.0}};
    const ResponseScan a = scan_waiting_times(model, table5, grids, opt);
    opt.switch_amplitude = 0.5 * cfg2.pulse_amplitude;
    const ResponseScan b = scan_waiting_times(model, table5, grids, opt);
    const double num = std::max((a.rephasing[0] - b.rephasing[0]).cwiseAbs().maxCoeff(),
                                (a.nonrephasing[0] - b.nonrephasing[0]).cwiseAbs().maxCoeff());
    const double den = std::max(a.rephasing[0].cwiseAbs().maxCoeff(),
                                a.nonrephasing[0].cwiseAbs().maxCoeff());
    const double rel = num / den;
    report(5, rel < 1e-3,
           "switch amplitudes 0.01 vs 0.005 on the fig2 grid at T = 0 differ by " + fmt(rel) +
               " (limit 1e-3)");
  }

  // 6. Decoupled bath: scan matches a dense-exponential pathway evaluation.
  {
    const double T_wait = 20.0;
    std::mt19937 rng(7);
    std::vector<double> t1s, t3s;
    std::sample(t1g.begin(), t1g.end(), std::back_inserter(t1s), 5, rng);
    std::sample(t3g.begin(), t3g.end(), std::back_inserter(t3s), 5, rng);
    const double span = t1s.back() + T_wait + t3s.back();
    const SpectralDensity zero = SpectralDensity::power_law(0.0, 1.0, cfg2.bath.omega_c_rad_fs);
    const BathCorrelation corr0 = bath_correlation(
        zero, beta_fs, half, static_cast<std::size_t>(std::llround(span / half)), 1);
    const DissipatorTable table0(corr0, model.a0,
                                 units::cm1_to_rad_fs(model.basis.splitting_cm1));
    ResponseOptions opt;
    opt.mode = cfg2.mode;
    opt.variant = cfg2.variant;
    opt.switch_amplitude = cfg2.pulse_amplitude;
    opt.dressing_amplitude = cfg2.dressing_amplitude;
    opt.dt_fs = cfg2.dt_fs;
    opt.threads = 1;
    const ResponseScan scan =
        scan_waiting_times(model, table0, ResponseGrids{t1s, t3s, {T_wait}}, opt);

    const Matrix4c h = Matrix4c(model.h_rot_rad_fs.cast<Complex>().asDiagonal());
    auto u_of = [&](double t) { return Matrix4c((-ii * t * h).exp()); };
    const Matrix4c u2 = u_of(T_wait);
    const Matrix4c& mp = model.dipoles.mu_plus;
    const Matrix4c& mm = model.dipoles.mu_minus;
    double worst = 0.0;
    for (int k = 0; k < 5; ++k) {
      const Matrix4c u1 = u_of(t1s[static_cast<std::size_t>(k)]);
      const Matrix4c u3 = u_of(t3s[static_cast<std::size_t>(k)]);
      const Matrix4c rp3 =
          u3 * commutator(mp, u2 * commutator(mp, u1 * commutator(mm, model.rho0) * u1.adjoint()) *
                                  u2.adjoint()) *
          u3.adjoint();
      const Matrix4c nr3 =
          u3 * commutator(mp, u2 * commutator(mm, u1 * commutator(mp, model.rho0) * u1.adjoint()) *
                                  u2.adjoint()) *
          u3.adjoint();
      const Complex rp_ref = (mm * rp3).trace();
      const Complex nr_ref = (mm * nr3).trace();
      const auto i = static_cast<Eigen::Index>(k);
      worst = std::max(worst, std::abs(scan.rephasing[0](i, i) - rp_ref) /
                                  std::max(std::abs(rp_ref), 1e-9));
      worst = std::max(worst, std::abs(scan.nonrephasing[0](i, i) - nr_ref) /
                                  std::max(std::abs(nr_ref), 1e-9));
    }
    report(6, worst <= 1e-6,
           "zero-coupling scan vs dense-exponential pathways: max relative error " + fmt(worst) +
               " at 5 sampled (t1, t3) points (limit 1e-6)");
  }

  // 7. Memoryless bath collapses the two propagation modes onto one another.
  {
    const double gamma = 1e-8, delay = 80.0;
    const BathCorrelation dcorr = delta_correlation(gamma, half, 960);
    const DissipatorTable dtab(dcorr, model.a0,
                               units::cm1_to_rad_fs(model.basis.splitting_cm1));
    ResponseOptions opt;
    opt.variant = SegmentVariant::Telescoping;
    opt.switch_amplitude = 0.5;
    opt.dressing_amplitude = 0.5;
    opt.dt_fs = cfg2.dt_fs;
    opt.threads = 1;
    opt.mode = DynamicsMode::CorrelationAware;
    const PhysicalTrajectory ca = run_physical_protocol(model, dtab, opt, delay, delay, delay);
    opt.mode = DynamicsMode::FactorizedReset;
    const PhysicalTrajectory fr = run_physical_protocol(model, dtab, opt, delay, delay, delay);
    double worst = 0.0;
    for (std::size_t k = 0; k < ca.rho.size(); ++k)
      worst = std::max(worst, fro_norm(Matrix4c(ca.rho[k] - fr.rho[k])));
    const double moved = fro_norm(Matrix4c(ca.rho.back() - model.rho0));
    const bool ok = ca.rho.size() == fr.rho.size() && worst <= 1e-8 && moved > 1e-3;
    report(7, ok,
           "delta bath (gamma 1e-8): correlation-aware vs reset trajectories differ by " +
               fmt(worst) + " (limit 1e-8; pulses moved the state by " + fmt(moved) + ")");
  }

  // 8. Waiting-segment generator couples populations to coherences; the
  //    secular stationary reference does not.
  {
    const Matrix4c u_c = dressing_unitary(model.dipoles.mu, cfg2.dressing_amplitude);
    SegmentDissipator sd(table5, model.h_rot_rad_fs, u_c, DynamicsMode::CorrelationAware,
                         cfg2.variant);
    sd.begin_waiting(100.0);
    const Vector16c hdiag = hamiltonian_diagonal(model.h_rot_rad_fs);
    double best = 0.0;
    for (double tau = 0.0; tau <= 200.0; tau += cfg2.dt_fs) {
      Matrix16c g = liouville_generator(sd.lambda_at(tau), model.a0);
      for (int k = 0; k < 16; ++k) g(k, k) += hdiag(k);
      best = std::max(best, pop_to_coh_ratio(g));
    }

    const Eigen::Vector4d e_lab(0.0, units::cm1_to_rad_fs(model.basis.E1_cm1),
                                units::cm1_to_rad_fs(model.basis.E2_cm1),
                                units::cm1_to_rad_fs(model.basis.E1_cm1 + model.basis.E2_cm1));
    Matrix16c gsm = liouville_generator(table5.lambda_static_markov(), model.a0);
    const Vector16c hlab = hamiltonian_diagonal(e_lab);
    for (int k = 0; k < 16; ++k) gsm(k, k) += hlab(k);
    const double secular = pop_to_coh_ratio(secular_filter(gsm, e_lab));
    const bool ok = best > 1e-6 && secular < 1e-12;
    report(8, ok,
           "population-to-coherence block: " + fmt(best) +
               " of the largest element in segment 2 (needs > 1e-6); secular stationary "
               "reference " +
               fmt(secular) + " (needs < 1e-12)");
  }

  // 9. Site-basis separability monitor across the physical protocols.
  {
    double worst = 1.0;
    std::string where;
    for (const PresetRun& run : runs)
      if (run.res.min_pt_eigenvalue < worst) {
        worst = run.res.min_pt_eigenvalue;
        where = run.name + " at " + fmt(run.res.min_pt_time_fs) + " fs";
      }
    Matrix4c bell = Matrix4c::Zero();
    bell(0, 0) = bell(3, 3) = bell(0, 3) = bell(3, 0) = 0.5;
    const double bell_min = min_ppt_eigenvalue(bell);
    const bool ok = worst >= -1e-8 && std::abs(bell_min + 0.5) <= 1e-12;
    report(9, ok,
           "min partial-transpose eigenvalue " + fmt(worst) + " (" + where +
               ", limit -1e-8); Bell state check " + fmt(bell_min) + " vs -0.5");
  }

  // 10. Conservation, step-halving order, and kernel convergence certificates.
  {
    double drift = 0.0, lo = 1e9, hi = 0.0;
    for (const PresetRun& run : runs) {
      drift = std::max({drift, run.res.trace_drift, run.res.hermiticity_drift});
      lo = std::min(lo, run.res.rk4_ratio);
      hi = std::max(hi, run.res.rk4_ratio);
    }
    const double cert = f3.lambda_sm_certificate;
    const bool ok = drift < 1e-8 && lo >= 12.0 && hi <= 20.0 && cert < 0.02;
    report(10, ok,
           "max trace/hermiticity drift " + fmt(drift) + " (limit 1e-8); halving ratios in [" +
               fmt(lo) + ", " + fmt(hi) + "] (need [12, 20]); fig3 kernel certificate " +
               fmt(cert) + " (limit 0.02)");
  }

  std::printf("%d of 10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
