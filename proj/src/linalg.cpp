// Copyright 2026 the rbb-toolkit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rbb/linalg.hpp"

#include <sstream>
#include <stdexcept>

namespace rbb::linalg {

double hermitian_defect(const CMatrix& h) {
  if (h.rows() != h.cols()) return std::numeric_limits<double>::infinity();
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  return (h - h.adjoint()).cwiseAbs().maxCoeff() / scale;
}

void require_hermitian(const CMatrix& h, double tol) {
  if (h.rows() != h.cols()) {
    std::ostringstream msg;
    msg << "expected square matrix, got " << h.rows() << "x" << h.cols();
    throw std::invalid_argument(msg.str());
  }
  const double defect = hermitian_defect(h);
  if (!(defect <= tol)) {
    std::ostringstream msg;
    msg << "matrix is not Hermitian: relative symmetry defect " << defect
        << " exceeds tolerance " << tol;
    throw std::invalid_argument(msg.str());
  }
}

double spectral_radius(const CMatrix& h) {
  require_hermitian(h);
  if (h.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

PsdReport psd_report(const CMatrix& h, double tol) {
  require_hermitian(h);
  PsdReport report;
  if (h.rows() == 0) {
    report.psd = true;
    return report;
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  report.min_eigenvalue = es.eigenvalues().minCoeff();
  report.spectral_radius = es.eigenvalues().cwiseAbs().maxCoeff();
  report.psd = report.min_eigenvalue >= -tol * std::max(1.0, report.spectral_radius);
  return report;
}

bool is_psd(const CMatrix& h, double tol) { return psd_report(h, tol).psd; }

CMatrix pinv_hermitian(const CMatrix& h, double cutoff_rel) {
  require_hermitian(h);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  const RVector& ev = es.eigenvalues();
  const double cutoff = cutoff_rel * ev.cwiseAbs().maxCoeff();
  RVector inv = RVector::Zero(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev(i)) > cutoff) inv(i) = 1.0 / ev(i);
  }
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().adjoint();
}

SchurSplit generalized_schur(const CMatrix& z, Eigen::Index split, double tol) {
  require_hermitian(z);
  const Eigen::Index n = z.rows();
  if (split <= 0 || split >= n) {
    std::ostringstream msg;
    msg << "split " << split << " outside (0, " << n << ")";
    throw std::invalid_argument(msg.str());
  }
  const CMatrix a = z.topLeftCorner(split, split);
  const CMatrix b = z.topRightCorner(split, n - split);
  const CMatrix c = z.bottomRightCorner(n - split, n - split);

  const CMatrix a_pinv = pinv_hermitian(a);
  const CMatrix c_pinv = pinv_hermitian(c);

  SchurSplit result;
  result.s1 = c - b.adjoint() * a_pinv * b;
  result.s2 = a - b * c_pinv * b.adjoint();
  // Symmetrize away roundoff so downstream Hermitian checks stay happy.
  result.s1 = 0.5 * (result.s1 + result.s1.adjoint()).eval();
  result.s2 = 0.5 * (result.s2 + result.s2.adjoint()).eval();

  const double scale = std::max(1.0, spectral_radius(z));
  const double range_defect =
      b.size() == 0 ? 0.0
                    : ((CMatrix::Identity(split, split) - a * a_pinv) * b)
                          .cwiseAbs()
                          .maxCoeff();
  result.psd_certificate = is_psd(a, tol) && range_defect <= tol * scale &&
                           is_psd(result.s1, tol);
  return result;
}

RMatrix realify(const CMatrix& h) {
  require_hermitian(h);
  const Eigen::Index n = h.rows();
  RMatrix r(2 * n, 2 * n);
  r.topLeftCorner(n, n) = h.real();
  r.topRightCorner(n, n) = -h.imag();
  r.bottomLeftCorner(n, n) = h.imag();
  r.bottomRightCorner(n, n) = h.real();
  return r;
}

CMatrix complexify(const RMatrix& r) {
  if (r.rows() != r.cols() || r.rows() % 2 != 0) {
    throw std::invalid_argument("complexify expects an even-dimension square matrix");
  }
  const Eigen::Index n = r.rows() / 2;
  CMatrix h(n, n);
  h.real() = 0.5 * (r.topLeftCorner(n, n) + r.bottomRightCorner(n, n));
  h.imag() = 0.5 * (r.bottomLeftCorner(n, n) - r.topRightCorner(n, n));
  return h;
}

}  // namespace rbb::linalg
