// Copyright 2026 the rbb-toolkit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// Test-only reference implementations and generators. Everything here is
// independent of the solver/beamformer code paths it is used to check:
// closed forms go through plain Eigen factorizations only.

#ifndef RBB_TESTS_ORACLES_HPP
#define RBB_TESTS_ORACLES_HPP

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "rbb/linalg.hpp"
#include "rbb/rng.hpp"

namespace rbb::test {

inline CVector random_cvector(DetRng& rng, int n) {
  CVector v(n);
  for (int i = 0; i < n; ++i) v(i) = Complex(rng.gaussian(), rng.gaussian());
  return v;
}

inline CMatrix random_cmatrix(DetRng& rng, int rows, int cols) {
  CMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = Complex(rng.gaussian(), rng.gaussian());
  }
  return m;
}

inline CMatrix random_hermitian(DetRng& rng, int n) {
  const CMatrix m = random_cmatrix(rng, n, n);
  return 0.5 * (m + m.adjoint()).eval();
}

inline CMatrix random_psd(DetRng& rng, int n, int rank = -1) {
  if (rank < 0) rank = n;
  const CMatrix x = random_cmatrix(rng, n, rank);
  return (x * x.adjoint()).eval();
}

inline CMatrix random_unitary(DetRng& rng, int n) {
  const CMatrix m = random_cmatrix(rng, n, n);
  Eigen::HouseholderQR<CMatrix> qr(m);
  return qr.householderQ() * CMatrix::Identity(n, n);
}

// Equality-constrained minimum of w^H P w subject to C^H w = f:
//   w = P^{-1} C (C^H P^{-1} C)^{-1} f.
inline CVector lcmv_closed_form(const CMatrix& p, const CMatrix& c, const CVector& f) {
  const CMatrix pinv_c = p.fullPivLu().solve(c);
  const CMatrix gram = c.adjoint() * pinv_c;
  return pinv_c * gram.fullPivLu().solve(f);
}

// Binaural LCMV for this toolkit's convention: distortionless rows plus
// per-interferer ITF equality rows b_R w_L^H b = b_L w_R^H b.
inline CVector binaural_lcmv(const CMatrix& p_lift, const CVector& a,
                             const std::vector<CVector>& constraint_atfs) {
  const Eigen::Index m = a.size();
  const Eigen::Index cols = 2 + static_cast<Eigen::Index>(constraint_atfs.size());
  CMatrix c = CMatrix::Zero(2 * m, cols);
  CVector f(cols);
  c.col(0).head(m) = a;
  f(0) = std::conj(a(0));
  c.col(1).tail(m) = a;
  f(1) = std::conj(a(m - 1));
  for (std::size_t i = 0; i < constraint_atfs.size(); ++i) {
    const CVector& b = constraint_atfs[i];
    c.col(2 + static_cast<Eigen::Index>(i)).head(m) = b(m - 1) * b;
    c.col(2 + static_cast<Eigen::Index>(i)).tail(m) = -b(0) * b;
    f(2 + static_cast<Eigen::Index>(i)) = Complex(0.0, 0.0);
  }
  return lcmv_closed_form(p_lift, c, f);
}

}  // namespace rbb::test

#endif  // RBB_TESTS_ORACLES_HPP
