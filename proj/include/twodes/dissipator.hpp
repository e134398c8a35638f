// dissipator.hpp - accumulated relaxation kernel, pulse-dressed segment dissipators, superoperators
#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "twodes/bath.hpp"
#include "twodes/errors.hpp"
#include "twodes/linalg.hpp"

namespace twodes {

enum class DynamicsMode { CorrelationAware, FactorizedReset, StaticMarkov };
enum class SegmentVariant { AsPrinted, Telescoping };

// Interaction-picture kernel accumulated on a uniform half-step grid,
// Lambda(t) = Int_0^t C(s) exp(-i H s) A0 exp(+i H s) ds. With a diagonal
// frame Hamiltonian (0, -D/2, +D/2, 0) only four entries of the conjugated
// coupling operator are nonzero, so the whole table reduces to three scalar
// trapezoid integrals of C(s), C(s) e^{-iDs}, and C(s) e^{+iDs}.
class DissipatorTable {
 public:
  DissipatorTable(const BathCorrelation& corr, const Matrix4c& a0, double splitting_rad_fs)
      : spacing_fs_(corr.dt_fs), delta_rad_fs_(splitting_rad_fs), a0_(a0) {
    const std::size_t n = corr.samples.size();
    if (n < 2) throw std::invalid_argument("DissipatorTable: correlation grid too short");
    i0_.resize(n);
    ip_.resize(n);
    im_.resize(n);
    i0_[0] = ip_[0] = im_[0] = Complex{0.0, 0.0};
    Complex f0 = corr.samples[0], fp = corr.samples[0], fm = corr.samples[0];
    for (std::size_t k = 1; k < n; ++k) {
      const double t = spacing_fs_ * static_cast<double>(k);
      const Complex c = corr.samples[k];
      const Complex g0 = c;
      const Complex gp = c * std::exp(-ii * delta_rad_fs_ * t);
      const Complex gm = c * std::exp(+ii * delta_rad_fs_ * t);
      i0_[k] = i0_[k - 1] + 0.5 * spacing_fs_ * (f0 + g0);
      ip_[k] = ip_[k - 1] + 0.5 * spacing_fs_ * (fp + gp);
      im_[k] = im_[k - 1] + 0.5 * spacing_fs_ * (fm + gm);
      f0 = g0;
      fp = gp;
      fm = gm;
    }
    markov_limit_ = lambda_at_index(n - 1);
    certificate_ = 0.0;
    const double scale = fro_norm(markov_limit_);
    if (scale > 0.0) {
      const std::size_t last = n - 1;
      const std::size_t first = last - last / 10;
      for (std::size_t k = first; k <= last; ++k) {
        const double dev = fro_norm(Matrix4c(lambda_at_index(k) - markov_limit_)) / scale;
        certificate_ = std::max(certificate_, dev);
      }
    }
  }

  double spacing_fs() const { return spacing_fs_; }
  double span_fs() const { return spacing_fs_ * static_cast<double>(i0_.size() - 1); }
  const Matrix4c& coupling_operator() const { return a0_; }

  // Kernel accumulated from a segment start: only on-grid times are meaningful.
  Matrix4c lambda_static(double t_fs) const { return lambda_at_index(index_of(t_fs)); }

  // Fully accumulated kernel, the stationary generator of the memoryless reference.
  const Matrix4c& lambda_static_markov() const { return markov_limit_; }

  // Worst relative distance from the accumulated limit over the last tenth of
  // the grid; small values certify the kernel has genuinely saturated.
  double convergence_certificate() const { return certificate_; }

  // Same accumulated integrals on a coarser grid (every stride-th node kept),
  // so step-halving studies compare integrators against an identical kernel.
  DissipatorTable subsample(std::size_t stride) const {
    if (stride == 0 || (i0_.size() - 1) % stride != 0)
      throw std::invalid_argument("DissipatorTable::subsample: stride must divide the grid");
    DissipatorTable out;
    out.spacing_fs_ = spacing_fs_ * static_cast<double>(stride);
    out.delta_rad_fs_ = delta_rad_fs_;
    out.a0_ = a0_;
    const std::size_t m = (i0_.size() - 1) / stride + 1;
    out.i0_.resize(m);
    out.ip_.resize(m);
    out.im_.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
      out.i0_[k] = i0_[k * stride];
      out.ip_[k] = ip_[k * stride];
      out.im_[k] = im_[k * stride];
    }
    out.markov_limit_ = markov_limit_;
    out.certificate_ = certificate_;
    return out;
  }

 private:
  DissipatorTable() = default;

  std::size_t index_of(double t_fs) const {
    const double x = t_fs / spacing_fs_;
    const auto idx = static_cast<long long>(std::llround(x));
    if (std::abs(x - static_cast<double>(idx)) > 1e-6)
      throw std::invalid_argument("DissipatorTable: time " + std::to_string(t_fs) +
                                  " fs is off the half-step grid");
    if (idx < 0 || idx >= static_cast<long long>(i0_.size()))
      throw std::invalid_argument("DissipatorTable: time " + std::to_string(t_fs) +
                                  " fs outside table span " + std::to_string(span_fs()) + " fs");
    return static_cast<std::size_t>(idx);
  }

  Matrix4c lambda_at_index(std::size_t k) const {
    Matrix4c out = Matrix4c::Zero();
    out(1, 1) = a0_(1, 1) * i0_[k];
    out(2, 2) = a0_(2, 2) * i0_[k];
    out(1, 2) = a0_(1, 2) * im_[k];
    out(2, 1) = a0_(2, 1) * ip_[k];
    return out;
  }

  double spacing_fs_ = 0.0;
  double delta_rad_fs_ = 0.0;
  Matrix4c a0_;
  std::vector<Complex> i0_, ip_, im_;
  Matrix4c markov_limit_;
  double certificate_ = 0.0;
};

// Saturation is required for exponentially decaying memory; heavy-tailed baths
// are allowed to carry a reported residual instead.
inline void check_memory_convergence(double certificate, const SpectralDensity& sd,
                                     double limit = 0.02) {
  if (sd.kind == SpectralDensity::Kind::PowerLaw && sd.s >= 1.0 && certificate > limit)
    throw NumericalError("check_memory_convergence: kernel certificate " +
                         std::to_string(certificate) + " exceeds " + std::to_string(limit));
}

// exp(-i amplitude * mu) for Hermitian mu via spectral decomposition.
inline Matrix4c dressing_unitary(const Matrix4c& mu, double amplitude) {
  if (fro_norm(Matrix4c(mu - mu.adjoint())) > 1e-12 * std::max(1.0, fro_norm(mu)))
    throw std::invalid_argument("dressing_unitary: operator is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(mu);
  if (es.info() != Eigen::Success)
    throw NumericalError("dressing_unitary: eigendecomposition failed");
  Vector4c phases;
  for (int j = 0; j < 4; ++j) phases(j) = std::exp(-ii * amplitude * es.eigenvalues()(j));
  Matrix4c u = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
  if (fro_norm(Matrix4c(u * u.adjoint() - Matrix4c::Identity())) > 1e-10)
    throw NumericalError("dressing_unitary: result failed the unitarity check");
  return u;
}

// P(t) m P(t)^dagger with P(t) = exp(-i diag(energies) t).
inline Matrix4c phase_conjugate(const Matrix4c& m, const Eigen::Vector4d& energies_rad_fs,
                                double t_fs) {
  Matrix4c out;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      out(r, c) = std::exp(-ii * (energies_rad_fs(r) - energies_rad_fs(c)) * t_fs) * m(r, c);
  return out;
}

// Effective kernel seen inside one segment of the three-pulse protocol. The
// correlation-aware mode rewinds the accumulated kernel across each pulse and
// re-dresses the not-yet-integrated remainder with the pulse unitary, so
// earlier delays keep shaping the present dissipator. The reset mode restarts
// accumulation at every pulse; the static mode freezes the saturated kernel.
class SegmentDissipator {
 public:
  SegmentDissipator(const DissipatorTable& table, const Eigen::Vector4d& energies_rad_fs,
                    const Matrix4c& pulse_unitary, DynamicsMode mode, SegmentVariant variant)
      : table_(&table), energies_(energies_rad_fs), u_c_(pulse_unitary), mode_(mode),
        variant_(variant) {
    if (fro_norm(Matrix4c(u_c_ * u_c_.adjoint() - Matrix4c::Identity())) > 1e-10)
      throw std::invalid_argument("SegmentDissipator: pulse operator is not unitary");
    begin_coherence();
  }

  void begin_coherence() {
    stage_ = 1;
    t1_fs_ = t2_fs_ = 0.0;
  }

  void begin_waiting(double t1_fs) {
    stage_ = 2;
    t1_fs_ = t1_fs;
    t2_fs_ = 0.0;
    m2_ = dressed_product(t1_fs);
  }

  void begin_detection(double t1_fs, double t2_fs) {
    stage_ = 3;
    t1_fs_ = t1_fs;
    t2_fs_ = t2_fs;
    m3_ = u_c_ * phase_conjugate(dressed_product(t1_fs), energies_, t2_fs);
    const double slot = variant_ == SegmentVariant::AsPrinted ? t1_fs : t2_fs;
    m2_ = dressed_product(slot);
  }

  // Kernel at elapsed time tau since the latest pulse.
  Matrix4c lambda_at(double tau_fs) const {
    if (mode_ == DynamicsMode::StaticMarkov) return table_->lambda_static_markov();
    if (mode_ == DynamicsMode::FactorizedReset) return table_->lambda_static(tau_fs);

    const Matrix4c& sm = table_->lambda_static_markov();
    const Matrix4c l_tau = table_->lambda_static(tau_fs);
    if (stage_ == 1) {
      const Matrix4c u1 = phase_conjugate(u_c_, energies_, tau_fs);
      Matrix4c out = u1 * (sm - l_tau) * u1.adjoint();
      if (variant_ == SegmentVariant::Telescoping) out += l_tau;
      return out;
    }
    if (stage_ == 2) {
      const Matrix4c l_a = table_->lambda_static(t1_fs_ + tau_fs);
      const Matrix4c u1 = phase_conjugate(u_c_, energies_, tau_fs);
      const Matrix4c u2 = phase_conjugate(m2_, energies_, tau_fs);
      return u2 * (sm - l_a) * u2.adjoint() + u1 * (l_a - l_tau) * u1.adjoint() + l_tau;
    }
    const Matrix4c l_a = table_->lambda_static(t1_fs_ + t2_fs_ + tau_fs);
    const Matrix4c l_b = table_->lambda_static(t2_fs_ + tau_fs);
    const Matrix4c u1 = phase_conjugate(u_c_, energies_, tau_fs);
    const Matrix4c u2 = phase_conjugate(m2_, energies_, tau_fs);
    const Matrix4c u3 = phase_conjugate(m3_, energies_, tau_fs);
    return u3 * (sm - l_a) * u3.adjoint() + u2 * (l_a - l_b) * u2.adjoint() +
           u1 * (l_b - l_tau) * u1.adjoint() + l_tau;
  }

  // Cross-boundary part of the kernel: what survives after removing the
  // within-segment accumulation a memoryless restart would produce.
  Matrix4c lambda_memory(double tau_fs) const {
    return lambda_at(tau_fs) - table_->lambda_static(tau_fs);
  }

  const DissipatorTable& table() const { return *table_; }
  const Eigen::Vector4d& energies() const { return energies_; }
  const Matrix4c& pulse_unitary() const { return u_c_; }
  DynamicsMode mode() const { return mode_; }
  SegmentVariant variant() const { return variant_; }

 private:
  // U_c P(a) U_c P(a)^dagger, the two-pulse dressed propagator core.
  Matrix4c dressed_product(double a_fs) const {
    return u_c_ * phase_conjugate(u_c_, energies_, a_fs);
  }

  const DissipatorTable* table_;
  Eigen::Vector4d energies_;
  Matrix4c u_c_;
  DynamicsMode mode_;
  SegmentVariant variant_;
  int stage_ = 1;
  double t1_fs_ = 0.0, t2_fs_ = 0.0;
  Matrix4c m2_ = Matrix4c::Identity();
  Matrix4c m3_ = Matrix4c::Identity();
};

// Dissipative superoperator for the kernel form d rho = [L rho, A0] + [A0, rho L^dag],
// assembled on column-stacked 4x4 states, vec(rho)[r + 4c] = rho(r, c).
inline Matrix16c liouville_generator(const Matrix4c& lambda, const Matrix4c& a0) {
  const Matrix4c al = a0 * lambda;
  const Matrix4c la = lambda.adjoint() * a0;
  Matrix16c d;
  for (int c = 0; c < 4; ++c)
    for (int r = 0; r < 4; ++r)
      for (int l = 0; l < 4; ++l)
        for (int k = 0; k < 4; ++k) {
          Complex v = lambda(r, k) * a0(l, c) + a0(r, k) * std::conj(lambda(c, l));
          if (l == c) v -= al(r, k);
          if (r == k) v -= la(l, c);
          d(r + 4 * c, k + 4 * l) = v;
        }
  return d;
}

// Coherent part -i(E_r - E_c) acting elementwise, returned as the diagonal of
// the superoperator on the same column-stacked layout.
inline Vector16c hamiltonian_diagonal(const Eigen::Vector4d& energies_rad_fs) {
  Vector16c diag;
  for (int c = 0; c < 4; ++c)
    for (int r = 0; r < 4; ++r)
      diag(r + 4 * c) = -ii * (energies_rad_fs(r) - energies_rad_fs(c));
  return diag;
}

// Keep only superoperator elements connecting state-matrix entries with equal
// Bohr frequencies; everything else is the nonsecular remainder.
inline Matrix16c secular_filter(const Matrix16c& d, const Eigen::Vector4d& energies_rad_fs,
                                double tol_rad_fs = 1e-9) {
  Matrix16c out = Matrix16c::Zero();
  for (int c = 0; c < 4; ++c)
    for (int r = 0; r < 4; ++r)
      for (int l = 0; l < 4; ++l)
        for (int k = 0; k < 4; ++k) {
          const double w_out = energies_rad_fs(r) - energies_rad_fs(c);
          const double w_in = energies_rad_fs(k) - energies_rad_fs(l);
          if (std::abs(w_out - w_in) <= tol_rad_fs)
            out(r + 4 * c, k + 4 * l) = d(r + 4 * c, k + 4 * l);
        }
  return out;
}

}  // namespace twodes
