// entanglement.hpp - partial transpose positivity monitor on the two-site factorization
#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>

#include "twodes/errors.hpp"
#include "twodes/linalg.hpp"

namespace twodes {

// Site-basis ordering {ground, site-1 excited, site-2 excited, both excited}
// maps to two qubits as index = a + 2b with a the first and b the second
// site's occupation. Transposing the second factor swaps its ket and bra
// occupations: out[(a,b),(a',b')] = rho[(a,b'),(a',b)].
inline Matrix4c partial_transpose(const Matrix4c& rho_site) {
  auto idx = [](int a, int b) { return a + 2 * b; };
  Matrix4c out;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int ap = 0; ap < 2; ++ap)
        for (int bp = 0; bp < 2; ++bp)
          out(idx(a, b), idx(ap, bp)) = rho_site(idx(a, bp), idx(ap, b));
  return out;
}

// Smallest eigenvalue of the partially transposed state; negative values
// witness entanglement between the sites, values below a physical tolerance
// witness a broken density matrix.
inline double min_ppt_eigenvalue(const Matrix4c& rho_site) {
  const Matrix4c pt = partial_transpose(rho_site);
  if (fro_norm(Matrix4c(pt - pt.adjoint())) > 1e-9 * std::max(1.0, fro_norm(pt)))
    throw NumericalError("min_ppt_eigenvalue: partial transpose is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(pt);
  if (es.info() != Eigen::Success)
    throw NumericalError("min_ppt_eigenvalue: eigendecomposition failed");
  return es.eigenvalues().minCoeff();
}

}  // namespace twodes
