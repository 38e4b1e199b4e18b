// Copyright 2026 the rbb-toolkit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef RBB_LINALG_HPP
#define RBB_LINALG_HPP

#include <Eigen/Dense>
#include <complex>

namespace rbb {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

namespace linalg {

// max |H - H^H| relative to max(1, max |entry|).
double hermitian_defect(const CMatrix& h);

// Throws std::invalid_argument when h is not square or the Hermitian
// defect exceeds tol.
void require_hermitian(const CMatrix& h, double tol = 1e-12);

double spectral_radius(const CMatrix& h);

struct PsdReport {
  bool psd = false;
  double min_eigenvalue = 0.0;
  double spectral_radius = 0.0;
};

// Eigendecomposition-based PSD test: psd iff
//   lambda_min >= -tol * max(1, spectral radius).
// The margin (min eigenvalue) is reported for relaxation diagnostics.
PsdReport psd_report(const CMatrix& h, double tol);
bool is_psd(const CMatrix& h, double tol);

// Pseudo-inverse of a Hermitian matrix via eigendecomposition;
// eigenvalues below cutoff_rel * max |eigenvalue| are treated as zero.
CMatrix pinv_hermitian(const CMatrix& h, double cutoff_rel = 1e-10);

struct SchurSplit {
  CMatrix s1;   // C - B^H A^+ B
  CMatrix s2;   // A - B C^+ B^H
  bool psd_certificate = false;  // A >= 0 and (I - A A^+) B = 0 and S1 >= 0
};

// Generalized Schur complements of Z = [[A, B], [B^H, C]] where A is the
// top-left split x split block. Throws when split is not in (0, dim).
SchurSplit generalized_schur(const CMatrix& z, Eigen::Index split, double tol = 1e-9);

// [[Re H, -Im H], [Im H, Re H]]. Preserves PSD-ness, doubles the trace and
// the multiplicity of every eigenvalue.
RMatrix realify(const CMatrix& h);

// Recovers H from realify(H); input must carry the realified structure.
CMatrix complexify(const RMatrix& r);

}  // namespace linalg
}  // namespace rbb

#endif  // RBB_LINALG_HPP
