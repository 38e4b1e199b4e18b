// Copyright 2026 the rbb-toolkit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// Small dense cone solver for the per-bin programs of this toolkit:
// linear or convex-quadratic objective, linear equalities on w, nonnegative
// trace inequalities on the lift, 3-dimensional second-order cones and one
// PSD block. Complex data is realified up front, equalities are eliminated
// by a nullspace parameterization, and the remaining inequality-constrained
// problem is solved with a primal-dual path-following method: Nesterov-Todd
// scaling, Mehrotra predictor-corrector, and a dense reduced KKT system.
// Problem sizes here (<= ~80 real variables, PSD block <= 18x18) make dense
// linear algebra the right tool. The iteration is templated on the scalar
// type: solves run in double first and escalate to long double when the
// requested tolerances need it (weakly active constraints floor a double
// IPM near sqrt(machine epsilon)).

#include "rbb/cone_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace rbb {

namespace {

template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

int svec_dim(int p) { return p * (p + 1) / 2; }

// Packed symmetric vectorization with sqrt(2) off-diagonal scaling so that
// dot(svec X, svec Y) = tr(X Y).
template <typename T>
Vec<T> svec(const Mat<T>& x) {
  const int p = static_cast<int>(x.rows());
  const T root2 = std::sqrt(T(2));
  Vec<T> v(svec_dim(p));
  int idx = 0;
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i <= j; ++i) {
      v(idx++) = (i == j) ? x(i, j) : root2 * x(i, j);
    }
  }
  return v;
}

template <typename T>
Mat<T> smat(const Vec<T>& v, int p) {
  const T root2 = std::sqrt(T(2));
  Mat<T> x(p, p);
  int idx = 0;
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i <= j; ++i) {
      const T val = (i == j) ? v(idx) : v(idx) / root2;
      x(i, j) = val;
      x(j, i) = val;
      ++idx;
    }
  }
  return x;
}

// svec(A mat(u) A^T)
template <typename T>
Vec<T> congruence(const Mat<T>& a, const Vec<T>& u, int p) {
  const Mat<T> mat_u = smat(u, p);
  Mat<T> v = a * mat_u * a.transpose();
  v = T(0.5) * (v + v.transpose()).eval();
  return svec(v);
}

struct Block {
  enum Type { lp, soc, psd } type;
  int offset = 0;
  int dim = 0;  // stacked length (svec dimension for psd)
  int p = 0;    // matrix size for psd
};

template <typename T>
struct Scaling {
  Vec<T> lp_w;  // sqrt(s/z)
  T soc_beta = T(0);
  Mat<T> soc_w, soc_winv;
  Mat<T> psd_r, psd_rinv;
  Vec<T> psd_sigma;
  Vec<T> lambda;  // scaled point, lambda = W z = W^{-T} s
};

template <typename T>
Mat<T> soc_j(int k) {
  Mat<T> j = -Mat<T>::Identity(k, k);
  j(0, 0) = T(1);
  return j;
}

template <typename T>
T jdot(const Vec<T>& u, const Vec<T>& v) {
  return u(0) * v(0) - u.tail(u.size() - 1).dot(v.tail(v.size() - 1));
}

// Cholesky factor with an eigenvalue-floor fallback for iterates that sit
// numerically on the cone boundary.
template <typename T>
Mat<T> chol_or_floor(const Mat<T>& x) {
  Eigen::LLT<Mat<T>> llt(x);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Mat<T>> es(x);
  const T floor = std::max(T(1e-300), T(1e-16) * std::abs(es.eigenvalues().maxCoeff()));
  Vec<T> ev = es.eigenvalues().cwiseMax(floor);
  const Mat<T> sym =
      es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  Eigen::LLT<Mat<T>> llt2(sym);
  return llt2.matrixL();
}

template <typename T>
Scaling<T> compute_scaling(const Block& blk, const Vec<T>& s, const Vec<T>& z) {
  Scaling<T> sc;
  switch (blk.type) {
    case Block::lp: {
      sc.lp_w = (s.array() / z.array()).sqrt();
      sc.lambda = (s.array() * z.array()).sqrt();
      break;
    }
    case Block::soc: {
      const T a = std::sqrt(std::max(jdot(s, s), T(1e-300)));
      const T b = std::sqrt(std::max(jdot(z, z), T(1e-300)));
      const Vec<T> sb = s / a;
      const Vec<T> zb = z / b;
      const T gamma = std::sqrt(std::max((T(1) + sb.dot(zb)) / T(2), T(1e-300)));
      Vec<T> jzb = -zb;
      jzb(0) = zb(0);
      sc.soc_beta = std::sqrt(a / b);
      const Vec<T> v = (sb + jzb) / (T(2) * gamma);
      // W = beta * Q_v^{1/2}; the square root of the quadratic representation
      // has this closed form for v with v^T J v = 1.
      const int k = blk.dim;
      Mat<T> wh(k, k);
      wh(0, 0) = v(0);
      wh.row(0).tail(k - 1) = v.tail(k - 1).transpose();
      wh.col(0).tail(k - 1) = v.tail(k - 1);
      wh.bottomRightCorner(k - 1, k - 1) =
          Mat<T>::Identity(k - 1, k - 1) +
          v.tail(k - 1) * v.tail(k - 1).transpose() / (T(1) + v(0));
      const Mat<T> j = soc_j<T>(k);
      sc.soc_w = sc.soc_beta * wh;
      sc.soc_winv = (T(1) / sc.soc_beta) * (j * wh * j);
      sc.lambda = sc.soc_w * z;
      break;
    }
    case Block::psd: {
      const Mat<T> ls = chol_or_floor<T>(smat(s, blk.p));
      const Mat<T> lz = chol_or_floor<T>(smat(z, blk.p));
      Eigen::JacobiSVD<Mat<T>> svd(lz.transpose() * ls,
                                   Eigen::ComputeFullU | Eigen::ComputeFullV);
      const Vec<T> sig = svd.singularValues().cwiseMax(T(1e-150));
      const Vec<T> inv_sqrt = sig.cwiseSqrt().cwiseInverse();
      sc.psd_r = ls * svd.matrixV() * inv_sqrt.asDiagonal();
      // R^{-1} = sqrt(Sigma) V^T Ls^{-1}
      sc.psd_rinv = sig.cwiseSqrt().asDiagonal() * svd.matrixV().transpose() *
                    ls.template triangularView<Eigen::Lower>().solve(
                        Mat<T>::Identity(blk.p, blk.p));
      sc.psd_sigma = sig;
      sc.lambda = svec<T>(Mat<T>(sig.asDiagonal()));
      break;
    }
  }
  return sc;
}

enum class Op { w, wt, winv, winvt };

template <typename T>
Vec<T> apply_scaling(const Block& blk, const Scaling<T>& sc, Op op, const Vec<T>& u) {
  switch (blk.type) {
    case Block::lp:
      switch (op) {
        case Op::w:
        case Op::wt:
          return sc.lp_w.cwiseProduct(u);
        case Op::winv:
        case Op::winvt:
          return u.cwiseQuotient(sc.lp_w);
      }
      break;
    case Block::soc:
      switch (op) {
        case Op::w:
        case Op::wt:
          return sc.soc_w * u;
        case Op::winv:
        case Op::winvt:
          return sc.soc_winv * u;
      }
      break;
    case Block::psd:
      switch (op) {
        case Op::w:  // svec(R^T U R)
          return congruence<T>(sc.psd_r.transpose(), u, blk.p);
        case Op::wt:  // svec(R U R^T)
          return congruence<T>(sc.psd_r, u, blk.p);
        case Op::winv:  // svec(R^{-T} U R^{-1})
          return congruence<T>(Mat<T>(sc.psd_rinv.transpose()), u, blk.p);
        case Op::winvt:  // svec(R^{-1} U R^{-T})
          return congruence<T>(sc.psd_rinv, u, blk.p);
      }
      break;
  }
  return u;
}

template <typename T>
Vec<T> jordan_identity(const Block& blk) {
  switch (blk.type) {
    case Block::lp:
      return Vec<T>::Ones(blk.dim);
    case Block::soc: {
      Vec<T> e = Vec<T>::Zero(blk.dim);
      e(0) = T(1);
      return e;
    }
    case Block::psd:
      return svec<T>(Mat<T>::Identity(blk.p, blk.p));
  }
  return Vec<T>();
}

template <typename T>
Vec<T> jordan_mul(const Block& blk, const Vec<T>& u, const Vec<T>& v) {
  switch (blk.type) {
    case Block::lp:
      return u.cwiseProduct(v);
    case Block::soc: {
      Vec<T> r(blk.dim);
      r(0) = u.dot(v);
      r.tail(blk.dim - 1) = u(0) * v.tail(blk.dim - 1) + v(0) * u.tail(blk.dim - 1);
      return r;
    }
    case Block::psd: {
      const Mat<T> mu = smat(u, blk.p);
      const Mat<T> mv = smat(v, blk.p);
      return svec<T>(Mat<T>(T(0.5) * (mu * mv + mv * mu)));
    }
  }
  return Vec<T>();
}

// Solves lambda o x = d for x.
template <typename T>
Vec<T> jordan_div_lambda(const Block& blk, const Scaling<T>& sc, const Vec<T>& d) {
  switch (blk.type) {
    case Block::lp:
      return d.cwiseQuotient(sc.lambda);
    case Block::soc: {
      Mat<T> arrow = Mat<T>::Zero(blk.dim, blk.dim);
      arrow(0, 0) = sc.lambda(0);
      arrow.col(0).tail(blk.dim - 1) = sc.lambda.tail(blk.dim - 1);
      arrow.row(0).tail(blk.dim - 1) = sc.lambda.tail(blk.dim - 1).transpose();
      arrow.diagonal().tail(blk.dim - 1).array() = sc.lambda(0);
      return arrow.fullPivLu().solve(d);
    }
    case Block::psd: {
      const Mat<T> md = smat(d, blk.p);
      Mat<T> x(blk.p, blk.p);
      for (int i = 0; i < blk.p; ++i) {
        for (int j = 0; j < blk.p; ++j) {
          x(i, j) = T(2) * md(i, j) / (sc.psd_sigma(i) + sc.psd_sigma(j));
        }
      }
      return svec<T>(Mat<T>(T(0.5) * (x + x.transpose())));
    }
  }
  return Vec<T>();
}

template <typename T>
T min_eig(const Block& blk, const Vec<T>& u) {
  switch (blk.type) {
    case Block::lp:
      return u.minCoeff();
    case Block::soc:
      return u(0) - u.tail(u.size() - 1).norm();
    case Block::psd: {
      Eigen::SelfAdjointEigenSolver<Mat<T>> es(smat(u, blk.p), Eigen::EigenvaluesOnly);
      return es.eigenvalues().minCoeff();
    }
  }
  return T(0);
}

// Largest alpha >= 0 with point + alpha * dir in the cone; point is interior.
template <typename T>
T max_step(const Block& blk, const Vec<T>& point, const Vec<T>& dir) {
  const T inf = std::numeric_limits<T>::infinity();
  switch (blk.type) {
    case Block::lp: {
      T alpha = inf;
      for (int i = 0; i < blk.dim; ++i) {
        if (dir(i) < T(0)) alpha = std::min(alpha, -point(i) / dir(i));
      }
      return alpha;
    }
    case Block::soc: {
      const int k = blk.dim;
      const T a = dir(0) * dir(0) - dir.tail(k - 1).squaredNorm();
      const T b = T(2) * (point(0) * dir(0) - point.tail(k - 1).dot(dir.tail(k - 1)));
      const T c = point(0) * point(0) - point.tail(k - 1).squaredNorm();
      T alpha = inf;
      if (std::abs(a) < T(1e-300)) {
        if (b < T(0)) alpha = -c / b;
      } else {
        T disc = b * b - T(4) * a * c;
        if (a < T(0)) disc = std::max(disc, T(0));
        if (disc >= T(0)) {
          const T root = std::sqrt(disc);
          const T q = T(-0.5) * (b + (b >= T(0) ? root : -root));
          const T r1 = q / a;
          const T r2 = q != T(0) ? c / q : inf;
          for (T r : {r1, r2}) {
            if (r > T(0)) alpha = std::min(alpha, r);
          }
        }
      }
      if (dir(0) < T(0)) alpha = std::min(alpha, -point(0) / dir(0));
      return alpha;
    }
    case Block::psd: {
      const Mat<T> l = chol_or_floor<T>(smat(point, blk.p));
      const Mat<T> d = smat(dir, blk.p);
      const Mat<T> li = l.template triangularView<Eigen::Lower>().solve(
          Mat<T>::Identity(blk.p, blk.p));
      Mat<T> m = li * d * li.transpose();
      m = T(0.5) * (m + m.transpose()).eval();
      Eigen::SelfAdjointEigenSolver<Mat<T>> es(m, Eigen::EigenvaluesOnly);
      const T lmin = es.eigenvalues().minCoeff();
      return lmin >= T(0) ? inf : T(-1) / lmin;
    }
  }
  return inf;
}

// ---------------------------------------------------------------------------
// Complex -> real translation (double precision; the iteration casts).

struct VarLayout {
  int n = 0;
  bool lmi = false;
  int nx = 0;

  int re(int i) const { return i; }
  int im(int i) const { return n + i; }
  int theta_base() const { return 2 * n; }
  int theta_diag(int i) const { return theta_base() + i; }
  int pair_index(int i, int j) const { return j * (j - 1) / 2 + i; }  // i < j
  int theta_re(int i, int j) const { return theta_base() + n + 2 * pair_index(i, j); }
  int theta_im(int i, int j) const { return theta_base() + n + 2 * pair_index(i, j) + 1; }
};

CMatrix theta_to_hermitian(const VarLayout& lay, const RVector& x) {
  CMatrix w = CMatrix::Zero(lay.n, lay.n);
  for (int i = 0; i < lay.n; ++i) w(i, i) = x(lay.theta_diag(i));
  for (int j = 1; j < lay.n; ++j) {
    for (int i = 0; i < j; ++i) {
      const Complex v(x(lay.theta_re(i, j)), x(lay.theta_im(i, j)));
      w(i, j) = v;
      w(j, i) = std::conj(v);
    }
  }
  return w;
}

// Coefficients of tr(W(theta) P) over the theta variables.
void add_lift_coeffs(const VarLayout& lay, const CMatrix& p, double weight, RVector& coef) {
  for (int i = 0; i < lay.n; ++i) coef(lay.theta_diag(i)) += weight * p(i, i).real();
  for (int j = 1; j < lay.n; ++j) {
    for (int i = 0; i < j; ++i) {
      coef(lay.theta_re(i, j)) += weight * 2.0 * p(i, j).real();
      coef(lay.theta_im(i, j)) += weight * 2.0 * p(i, j).imag();
    }
  }
}

struct RealProblem {
  VarLayout lay;
  RMatrix q;  // (1/2) x^T Q x convention
  RVector c;
  RMatrix e;
  RVector f;
  RMatrix g;
  RVector h;
  std::vector<Block> blocks;
  double obj_scale = 1.0;
  int cone_degree = 0;
};

void append_equality_rows(const VarLayout& lay, const CVector& row, Complex rhs,
                          std::vector<RVector>& rows, std::vector<double>& rhs_list) {
  RVector r1 = RVector::Zero(lay.nx);
  RVector r2 = RVector::Zero(lay.nx);
  for (int i = 0; i < lay.n; ++i) {
    r1(lay.re(i)) = row(i).real();
    r1(lay.im(i)) = row(i).imag();
    r2(lay.re(i)) = -row(i).imag();
    r2(lay.im(i)) = row(i).real();
  }
  rows.push_back(std::move(r1));
  rhs_list.push_back(rhs.real());
  rows.push_back(std::move(r2));
  rhs_list.push_back(rhs.imag());
}

RealProblem translate(const ConeProblem& prob) {
  RealProblem rp;
  rp.lay.n = prob.dim;
  rp.lay.lmi = prob.lmi;
  rp.lay.nx = 2 * prob.dim + (prob.lmi ? prob.dim * prob.dim : 0);
  const VarLayout& lay = rp.lay;

  double scale = 1.0;
  if (prob.quad_objective.size() > 0) {
    scale = std::max(scale, prob.quad_objective.cwiseAbs().maxCoeff());
  }
  if (prob.lift_objective.size() > 0) {
    scale = std::max(scale, prob.lift_objective.cwiseAbs().maxCoeff());
  }
  rp.obj_scale = scale;

  rp.q = RMatrix::Zero(lay.nx, lay.nx);
  if (prob.quad_objective.size() > 0) {
    // w^H Q w = [Re w; Im w]^T realify(Q) [Re w; Im w]
    rp.q.topLeftCorner(2 * lay.n, 2 * lay.n) =
        (2.0 / scale) * linalg::realify(prob.quad_objective);
  }
  rp.c = RVector::Zero(lay.nx);
  if (prob.lift_objective.size() > 0) {
    add_lift_coeffs(lay, prob.lift_objective, 1.0 / scale, rp.c);
  }

  std::vector<RVector> eq_rows;
  std::vector<double> eq_rhs;
  for (const auto& [row, rhs] : prob.equalities) {
    append_equality_rows(lay, row, rhs, eq_rows, eq_rhs);
  }

  std::vector<RVector> g_rows;
  std::vector<double> h_vals;

  if (!prob.trace_ineqs.empty() || !prob.halfspaces.empty()) {
    Block blk;
    blk.type = Block::lp;
    blk.offset = 0;
    blk.dim = static_cast<int>(prob.trace_ineqs.size() + prob.halfspaces.size());
    rp.blocks.push_back(blk);
    rp.cone_degree += blk.dim;
    for (const auto& gi : prob.trace_ineqs) {
      // Unit-scaled rows; tr(W G) <= 0 is invariant to positive scaling.
      const double norm = std::max(1e-300, gi.cwiseAbs().maxCoeff());
      RVector row = RVector::Zero(lay.nx);
      add_lift_coeffs(lay, gi, 1.0 / norm, row);
      g_rows.push_back(std::move(row));
      h_vals.push_back(0.0);
    }
    for (const auto& [hrow, rhs] : prob.halfspaces) {
      // Re(row^H w) >= rhs as a nonnegative slack s = Re(row^H w) - rhs.
      RVector row = RVector::Zero(lay.nx);
      for (int i = 0; i < lay.n; ++i) {
        row(lay.re(i)) = -hrow(i).real();
        row(lay.im(i)) = -hrow(i).imag();
      }
      g_rows.push_back(std::move(row));
      h_vals.push_back(-rhs);
    }
  }

  for (const auto& soc : prob.socs) {
    if (soc.radius <= 0.0) {
      // Degenerate |row^H w| <= 0: emit the equality instead.
      append_equality_rows(lay, soc.row, Complex(0.0, 0.0), eq_rows, eq_rhs);
      continue;
    }
    Block blk;
    blk.type = Block::soc;
    blk.offset = static_cast<int>(g_rows.size());
    blk.dim = 3;
    rp.blocks.push_back(blk);
    rp.cone_degree += 1;
    g_rows.push_back(RVector::Zero(lay.nx));
    h_vals.push_back(soc.radius);
    RVector r1 = RVector::Zero(lay.nx);
    RVector r2 = RVector::Zero(lay.nx);
    for (int i = 0; i < lay.n; ++i) {
      r1(lay.re(i)) = -soc.row(i).real();
      r1(lay.im(i)) = -soc.row(i).imag();
      r2(lay.re(i)) = soc.row(i).imag();
      r2(lay.im(i)) = -soc.row(i).real();
    }
    g_rows.push_back(std::move(r1));
    h_vals.push_back(0.0);
    g_rows.push_back(std::move(r2));
    h_vals.push_back(0.0);
  }

  if (prob.lmi) {
    const int pz = 2 * (lay.n + 1);
    Block blk;
    blk.type = Block::psd;
    blk.offset = static_cast<int>(g_rows.size());
    blk.p = pz;
    blk.dim = svec_dim(pz);
    rp.blocks.push_back(blk);
    rp.cone_degree += pz;

    const int zc = lay.n + 1;
    auto basis_column = [&](const CMatrix& dz) {
      return svec<double>(linalg::realify(dz));
    };

    std::vector<RVector> cols(lay.nx);
    CMatrix dz = CMatrix::Zero(zc, zc);
    for (int i = 0; i < lay.n; ++i) {
      dz.setZero();
      dz(i, lay.n) = Complex(1.0, 0.0);
      dz(lay.n, i) = Complex(1.0, 0.0);
      cols[lay.re(i)] = basis_column(dz);
      dz.setZero();
      dz(i, lay.n) = Complex(0.0, 1.0);
      dz(lay.n, i) = Complex(0.0, -1.0);
      cols[lay.im(i)] = basis_column(dz);
    }
    for (int i = 0; i < lay.n; ++i) {
      dz.setZero();
      dz(i, i) = Complex(1.0, 0.0);
      cols[lay.theta_diag(i)] = basis_column(dz);
    }
    for (int j = 1; j < lay.n; ++j) {
      for (int i = 0; i < j; ++i) {
        dz.setZero();
        dz(i, j) = Complex(1.0, 0.0);
        dz(j, i) = Complex(1.0, 0.0);
        cols[lay.theta_re(i, j)] = basis_column(dz);
        dz.setZero();
        dz(i, j) = Complex(0.0, 1.0);
        dz(j, i) = Complex(0.0, -1.0);
        cols[lay.theta_im(i, j)] = basis_column(dz);
      }
    }

    CMatrix z0 = CMatrix::Zero(zc, zc);
    z0(lay.n, lay.n) = Complex(1.0, 0.0);
    const RVector h_psd = svec<double>(linalg::realify(z0));

    for (int r = 0; r < blk.dim; ++r) {
      RVector row(lay.nx);
      for (int k = 0; k < lay.nx; ++k) row(k) = -cols[k](r);
      g_rows.push_back(std::move(row));
      h_vals.push_back(h_psd(r));
    }
  }

  rp.e.resize(static_cast<Eigen::Index>(eq_rows.size()), lay.nx);
  rp.f.resize(static_cast<Eigen::Index>(eq_rows.size()));
  for (std::size_t i = 0; i < eq_rows.size(); ++i) {
    rp.e.row(static_cast<Eigen::Index>(i)) = eq_rows[i].transpose();
    rp.f(static_cast<Eigen::Index>(i)) = eq_rhs[i];
  }
  rp.g.resize(static_cast<Eigen::Index>(g_rows.size()), lay.nx);
  rp.h.resize(static_cast<Eigen::Index>(g_rows.size()));
  for (std::size_t i = 0; i < g_rows.size(); ++i) {
    rp.g.row(static_cast<Eigen::Index>(i)) = g_rows[i].transpose();
    rp.h(static_cast<Eigen::Index>(i)) = h_vals[i];
  }
  return rp;
}

struct Reduced {
  RMatrix q;
  RVector c;
  double c0 = 0.0;
  RMatrix g;
  RVector h;
  RVector x0;
  RMatrix basis;
  bool consistent = true;
};

Reduced eliminate_equalities(const RealProblem& rp) {
  Reduced red;
  const int nx = rp.lay.nx;
  if (rp.e.rows() == 0) {
    red.x0 = RVector::Zero(nx);
    red.basis = RMatrix::Identity(nx, nx);
  } else {
    Eigen::JacobiSVD<RMatrix> svd(rp.e, Eigen::ComputeThinU | Eigen::ComputeFullV);
    const RVector& sv = svd.singularValues();
    const double tol = 1e-12 * std::max(1.0, sv.size() > 0 ? sv(0) : 0.0);
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      if (sv(i) > tol) ++rank;
    }
    RVector inv = RVector::Zero(sv.size());
    for (int i = 0; i < rank; ++i) inv(i) = 1.0 / sv(i);
    red.x0 = svd.matrixV().leftCols(sv.size()) * inv.asDiagonal() *
             svd.matrixU().transpose() * rp.f;
    const double resid = (rp.e * red.x0 - rp.f).cwiseAbs().maxCoeff();
    if (resid > 1e-9 * std::max(1.0, rp.f.cwiseAbs().maxCoeff())) {
      red.consistent = false;
      return red;
    }
    red.basis = svd.matrixV().rightCols(nx - rank);
  }
  red.q = red.basis.transpose() * rp.q * red.basis;
  red.c = red.basis.transpose() * (rp.q * red.x0 + rp.c);
  red.c0 = 0.5 * red.x0.dot(rp.q * red.x0) + rp.c.dot(red.x0);
  red.g = rp.g * red.basis;
  red.h = rp.h - rp.g * red.x0;
  return red;
}

// ---------------------------------------------------------------------------
// Interior-point iteration, templated on the scalar type.

struct IpmResult {
  RVector t;
  SolveStatus status = SolveStatus::max_iter;
  int iterations = 0;
  double gap = 0.0;
  double pres = 0.0, dres = 0.0;
  double kkt_condition = 0.0;
  std::vector<IterationRecord> trace;
  std::string message;
};

template <typename T>
struct KktFactor {
  Eigen::PartialPivLU<Mat<T>> lu;
  Mat<T> b;
  T condition = T(0);
  bool ok = false;

  Vec<T> solve(const Vec<T>& rhs) const {
    Vec<T> x = lu.solve(rhs);
    for (int round = 0; round < 2; ++round) {
      const Vec<T> r = rhs - b * x;
      x += lu.solve(r);
    }
    return x;
  }
};

template <typename T>
KktFactor<T> factor_kkt(const Mat<T>& b) {
  KktFactor<T> f;
  f.b = b;
  Mat<T> m = b;
  const T eps = std::numeric_limits<T>::epsilon();
  m.diagonal().array() += T(100) * eps * std::max(T(1), b.diagonal().cwiseAbs().maxCoeff());
  f.lu.compute(m);
  const Vec<T> d = f.lu.matrixLU().diagonal().cwiseAbs();
  const T hi = d.maxCoeff();
  const T lo = d.minCoeff();
  f.ok = lo > T(0) && std::isfinite(static_cast<double>(hi));
  f.condition = f.ok ? hi / lo : std::numeric_limits<T>::infinity();
  return f;
}

template <typename T>
IpmResult run_ipm(const Reduced& red_d, const std::vector<Block>& blocks,
                  int cone_degree, double obj_scale_d, const SolverOptions& opts) {
  const T inf = std::numeric_limits<T>::infinity();
  IpmResult res;
  const int nt = static_cast<int>(red_d.basis.cols());
  const Eigen::Index nd = red_d.h.size();

  const Mat<T> q = red_d.q.cast<T>();
  const Vec<T> c = red_d.c.cast<T>();
  const Mat<T> g = red_d.g.cast<T>();
  const Vec<T> h = red_d.h.cast<T>();
  const T c0 = T(red_d.c0);
  const T obj_scale = T(obj_scale_d);

  auto pobj = [&](const Vec<T>& t) { return T(0.5) * t.dot(q * t) + c.dot(t) + c0; };

  // No cone constraints: a single Newton solve.
  if (nd == 0 || cone_degree == 0) {
    res.t = RVector::Zero(nt);
    if (nt > 0) {
      KktFactor<T> f = factor_kkt<T>(q);
      if (!f.ok) {
        res.status = SolveStatus::numerical;
        res.message = "singular unconstrained system";
        return res;
      }
      res.t = f.solve(Vec<T>(-c)).template cast<double>();
      res.kkt_condition = static_cast<double>(f.condition);
    }
    res.status = SolveStatus::optimal;
    IterationRecord rec;
    rec.primal_objective = static_cast<double>(pobj(res.t.cast<T>()) * obj_scale);
    rec.dual_objective = rec.primal_objective;
    res.trace.push_back(rec);
    return res;
  }

  // Fully determined variables: check cone feasibility of the constant.
  if (nt == 0) {
    res.t = RVector::Zero(0);
    T worst = T(0);
    for (const auto& blk : blocks) {
      worst = std::min(worst, min_eig<T>(blk, h.segment(blk.offset, blk.dim)));
    }
    const T scale = std::max(T(1), h.cwiseAbs().maxCoeff());
    res.status = worst >= -T(opts.feas_tol) * scale ? SolveStatus::optimal
                                                    : SolveStatus::infeasible;
    if (res.status == SolveStatus::infeasible) {
      res.message = "equalities pin the variable outside the cone constraints";
    }
    IterationRecord rec;
    rec.primal_objective = static_cast<double>(c0 * obj_scale);
    rec.dual_objective = rec.primal_objective;
    res.trace.push_back(rec);
    return res;
  }

  // Initial point: one KKT solve with identity scaling, then shift the slack
  // and dual into the cone interior.
  Vec<T> t, s(nd), z(nd);
  {
    Mat<T> b = q + g.transpose() * g;
    KktFactor<T> f = factor_kkt<T>(b);
    if (!f.ok) {
      res.status = SolveStatus::numerical;
      res.message = "initialization factorization failed";
      return res;
    }
    t = f.solve(Vec<T>(-c + g.transpose() * h));
    Vec<T> s_hat = h - g * t;
    Vec<T> z_hat = -s_hat;
    for (const auto& blk : blocks) {
      auto seg_s = s_hat.segment(blk.offset, blk.dim);
      auto seg_z = z_hat.segment(blk.offset, blk.dim);
      const Vec<T> e = jordan_identity<T>(blk);
      const T ms = min_eig<T>(blk, seg_s);
      const T mz = min_eig<T>(blk, seg_z);
      const T margin = T(1e-10) * (T(1) + seg_s.norm() + seg_z.norm());
      s.segment(blk.offset, blk.dim) =
          ms < margin ? Vec<T>(seg_s + (T(1) - ms) * e) : Vec<T>(seg_s);
      z.segment(blk.offset, blk.dim) =
          mz < margin ? Vec<T>(seg_z + (T(1) - mz) * e) : Vec<T>(seg_z);
    }
  }

  const T h_scale = std::max(T(1), h.norm());
  const T c_scale = std::max(T(1), c.norm());
  T mu0 = T(-1);

  T best_merit = inf;
  Vec<T> best_t = t;
  double best_gap = std::numeric_limits<double>::infinity();
  double best_pres = best_gap, best_dres = best_gap;
  T best_mu = inf;
  int iters_since_progress = 0;

  std::vector<Scaling<T>> scalings(blocks.size());
  for (int iter = 0; iter <= opts.max_iter; ++iter) {
    const Vec<T> rx = q * t + c + g.transpose() * z;
    const Vec<T> rz = g * t + s - h;
    const T gap = s.dot(z);
    const T mu = gap / T(cone_degree);
    if (mu0 < T(0)) mu0 = mu;
    if (!(mu > T(0))) {
      res.status = SolveStatus::max_iter;
      res.message = "complementarity products left the cone";
      break;
    }

    const T primal = pobj(t);
    const T pres = rz.norm() / h_scale;
    const T dres = rx.norm() / c_scale;

    const T merit = std::max({pres, dres, std::abs(gap) / (T(1) + std::abs(primal))});
    if (merit < best_merit) {
      best_merit = merit;
      best_t = t;
      best_gap = static_cast<double>(gap * obj_scale);
      best_pres = static_cast<double>(pres);
      best_dres = static_cast<double>(dres);
    }

    IterationRecord rec;
    rec.primal_objective = static_cast<double>(primal * obj_scale);
    rec.gap = static_cast<double>(gap * obj_scale);
    rec.dual_objective =
        static_cast<double>((primal - gap - t.dot(rx) + z.dot(rz)) * obj_scale);
    rec.primal_residual = static_cast<double>(pres);
    rec.dual_residual = static_cast<double>(dres);
    rec.residual_slack = static_cast<double>(
        (rx.norm() * (T(1) + t.norm()) + rz.norm() * (T(1) + z.norm())) * obj_scale);
    res.trace.push_back(rec);

    res.gap = static_cast<double>(gap * obj_scale);
    res.pres = static_cast<double>(pres);
    res.dres = static_cast<double>(dres);
    res.iterations = iter;

    const T abs_obj = std::abs(primal * obj_scale);
    if (pres <= T(opts.feas_tol) && dres <= T(opts.feas_tol) &&
        gap * obj_scale <= T(opts.gap_tol) * (T(1) + abs_obj)) {
      res.status = SolveStatus::optimal;
      break;
    }
    if (iter == opts.max_iter) {
      res.status = SolveStatus::max_iter;
      std::ostringstream msg;
      msg << "max iterations: gap=" << static_cast<double>(gap * obj_scale)
          << " pres=" << static_cast<double>(pres)
          << " dres=" << static_cast<double>(dres);
      res.message = msg.str();
      break;
    }
    if (mu < T(1e-14) * mu0 && pres > T(1e-5)) {
      res.status = SolveStatus::infeasible;
      res.message = "complementarity vanished with large primal residual";
      break;
    }
    if (mu < T(0.95) * best_mu) {
      best_mu = mu;
      iters_since_progress = 0;
    } else if (++iters_since_progress >= 20 && iter >= 20) {
      res.status = SolveStatus::max_iter;
      res.message = "progress stalled";
      break;
    }

    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
      scalings[bi] =
          compute_scaling<T>(blocks[bi], s.segment(blocks[bi].offset, blocks[bi].dim),
                             z.segment(blocks[bi].offset, blocks[bi].dim));
    }

    // Reduced SPD system B = Q + G^T (W^T W)^{-1} G, factored once and shared
    // by the predictor and corrector solves.
    Mat<T> b = q;
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
      const Block& blk = blocks[bi];
      const auto gblk = g.middleRows(blk.offset, blk.dim);
      if (blk.type == Block::lp) {
        const Vec<T> winv2 = scalings[bi].lp_w.array().square().inverse();
        b.noalias() += gblk.transpose() * winv2.asDiagonal() * gblk;
      } else if (blk.type == Block::soc) {
        const Mat<T> m = scalings[bi].soc_winv * scalings[bi].soc_winv;
        b.noalias() += gblk.transpose() * m * gblk;
      } else {
        // Gram form: rows of Y are W^{-T} applied to G columns.
        Mat<T> y(blk.dim, nt);
        for (int cidx = 0; cidx < nt; ++cidx) {
          y.col(cidx) = apply_scaling<T>(blk, scalings[bi], Op::winvt, gblk.col(cidx));
        }
        b.noalias() += y.transpose() * y;
      }
    }
    KktFactor<T> f = factor_kkt<T>(b);
    res.kkt_condition = std::max(res.kkt_condition, static_cast<double>(f.condition));
    if (!f.ok) {
      res.status = SolveStatus::numerical;
      std::ostringstream msg;
      msg << "kkt factorization breakdown at iteration " << iter;
      res.message = msg.str();
      break;
    }

    auto apply_winv2 = [&](const Vec<T>& v) {
      Vec<T> out(nd);
      for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
        const Block& blk = blocks[bi];
        out.segment(blk.offset, blk.dim) = apply_scaling<T>(
            blk, scalings[bi], Op::winv,
            apply_scaling<T>(blk, scalings[bi], Op::winvt,
                             v.segment(blk.offset, blk.dim)));
      }
      return out;
    };
    auto apply_w2 = [&](const Vec<T>& v) {
      Vec<T> out(nd);
      for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
        const Block& blk = blocks[bi];
        out.segment(blk.offset, blk.dim) = apply_scaling<T>(
            blk, scalings[bi], Op::wt,
            apply_scaling<T>(blk, scalings[bi], Op::w, v.segment(blk.offset, blk.dim)));
      }
      return out;
    };

    // Solves [Q G^T; G -W^T W] [dt; dz] = [rhs_x; rhs_z] through the SPD
    // reduction, refined against the exact blockwise operators.
    auto solve_kkt = [&](const Vec<T>& rhs_x, const Vec<T>& rhs_z, Vec<T>& dt,
                         Vec<T>& dz) {
      dt = f.solve(rhs_x + g.transpose() * apply_winv2(rhs_z));
      dz = apply_winv2(g * dt - rhs_z);
      for (int round = 0; round < 2; ++round) {
        const Vec<T> res_x = rhs_x - (q * dt + g.transpose() * dz);
        const Vec<T> res_z = rhs_z - (g * dt - apply_w2(dz));
        const Vec<T> cor = f.solve(res_x + g.transpose() * apply_winv2(res_z));
        dt += cor;
        dz += apply_winv2(g * cor - res_z);
      }
    };

    // res_scale = 1 for the predictor; 1 - sigma for the combined step.
    auto solve_direction = [&](const Vec<T>& ds_target, T res_scale, Vec<T>& dt,
                               Vec<T>& dz, Vec<T>& ds) {
      Vec<T> rhs_z(nd);
      for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
        const Block& blk = blocks[bi];
        const Vec<T> div = jordan_div_lambda<T>(blk, scalings[bi],
                                                ds_target.segment(blk.offset, blk.dim));
        rhs_z.segment(blk.offset, blk.dim) =
            -res_scale * rz.segment(blk.offset, blk.dim) -
            apply_scaling<T>(blk, scalings[bi], Op::wt, div);
      }
      solve_kkt(Vec<T>(-res_scale * rx), rhs_z, dt, dz);
      ds = -res_scale * rz - g * dt;
    };

    auto step_to_boundary = [&](const Vec<T>& ds, const Vec<T>& dz) {
      T alpha = inf;
      for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
        const Block& blk = blocks[bi];
        alpha = std::min(alpha, max_step<T>(blk, s.segment(blk.offset, blk.dim),
                                            ds.segment(blk.offset, blk.dim)));
        alpha = std::min(alpha, max_step<T>(blk, z.segment(blk.offset, blk.dim),
                                            dz.segment(blk.offset, blk.dim)));
      }
      return alpha;
    };

    // Affine (predictor) direction.
    Vec<T> ds_target(nd);
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
      const Block& blk = blocks[bi];
      ds_target.segment(blk.offset, blk.dim) =
          -jordan_mul<T>(blk, scalings[bi].lambda, scalings[bi].lambda);
    }
    Vec<T> dt_a, dz_a, ds_a;
    solve_direction(ds_target, T(1), dt_a, dz_a, ds_a);
    if (!dt_a.allFinite() || !dz_a.allFinite()) {
      res.status = SolveStatus::numerical;
      std::ostringstream msg;
      msg << "kkt solve produced a non-finite direction at iteration " << iter;
      res.message = msg.str();
      break;
    }
    const T alpha_aff = std::min(T(1), step_to_boundary(ds_a, dz_a));
    const T gap_aff = (s + alpha_aff * ds_a).dot(z + alpha_aff * dz_a);
    T sigma = gap > T(0) ? gap_aff / gap : T(0);
    sigma = std::clamp(sigma, T(0), T(1));
    sigma = sigma * sigma * sigma;

    // Combined (corrector) direction.
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
      const Block& blk = blocks[bi];
      const Vec<T> wds = apply_scaling<T>(blk, scalings[bi], Op::winvt,
                                          ds_a.segment(blk.offset, blk.dim));
      const Vec<T> wdz =
          apply_scaling<T>(blk, scalings[bi], Op::w, dz_a.segment(blk.offset, blk.dim));
      ds_target.segment(blk.offset, blk.dim) +=
          -jordan_mul<T>(blk, wds, wdz) + sigma * mu * jordan_identity<T>(blk);
    }
    Vec<T> dt, dz, ds;
    solve_direction(ds_target, T(1) - sigma, dt, dz, ds);
    T alpha = std::min(T(1), T(0.99) * step_to_boundary(ds, dz));
    if (alpha < T(0.2)) {
      // Near-degenerate geometry; retry once with stronger centering.
      sigma = std::max(sigma, T(0.5));
      Vec<T> ds_center(nd);
      for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
        const Block& blk = blocks[bi];
        const Vec<T> wds = apply_scaling<T>(blk, scalings[bi], Op::winvt,
                                            ds_a.segment(blk.offset, blk.dim));
        const Vec<T> wdz = apply_scaling<T>(blk, scalings[bi], Op::w,
                                            dz_a.segment(blk.offset, blk.dim));
        ds_center.segment(blk.offset, blk.dim) =
            -jordan_mul<T>(blk, scalings[bi].lambda, scalings[bi].lambda) -
            jordan_mul<T>(blk, wds, wdz) + sigma * mu * jordan_identity<T>(blk);
      }
      Vec<T> dt2, dz2, ds2;
      solve_direction(ds_center, T(1) - sigma, dt2, dz2, ds2);
      const T alpha2 = std::min(T(1), T(0.99) * step_to_boundary(ds2, dz2));
      if (alpha2 > alpha) {
        dt = dt2;
        dz = dz2;
        ds = ds2;
        alpha = alpha2;
      }
    }

    // The analytic step bound can overshoot once a block factors on the
    // numerical boundary; verify strict interiority and back off if needed.
    auto strictly_interior = [&](T a) {
      for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
        const Block& blk = blocks[bi];
        const Vec<T> s_try =
            s.segment(blk.offset, blk.dim) + a * ds.segment(blk.offset, blk.dim);
        const Vec<T> z_try =
            z.segment(blk.offset, blk.dim) + a * dz.segment(blk.offset, blk.dim);
        if (min_eig<T>(blk, s_try) <= T(0) || min_eig<T>(blk, z_try) <= T(0)) {
          return false;
        }
      }
      return true;
    };
    int backoffs = 0;
    while (!strictly_interior(alpha) && backoffs < 40) {
      alpha *= T(0.8);
      ++backoffs;
    }
    if (backoffs == 40) {
      res.status = SolveStatus::max_iter;
      res.message = "no interior step available";
      break;
    }

    if (opts.verbose) {
      std::fprintf(stderr,
                   "it %3d mu=%10.3e gap=%10.3e pres=%9.2e dres=%9.2e sigma=%6.4f "
                   "alpha=%6.4f bk=%d pobj=%.12e\n",
                   iter, static_cast<double>(mu), static_cast<double>(gap * obj_scale),
                   static_cast<double>(pres), static_cast<double>(dres),
                   static_cast<double>(sigma), static_cast<double>(alpha), backoffs,
                   static_cast<double>(primal * obj_scale));
    }

    t += alpha * dt;
    s += alpha * ds;
    z += alpha * dz;
  }

  if (res.status != SolveStatus::optimal && best_merit < inf) {
    // Report the cleanest iterate seen rather than a late degraded one, and
    // grade it: boundary stalls still count as optimal when the iterate
    // satisfies the requested tolerances, or at least the optimal-status
    // contract (gap within 1e-7 relative, primal feasibility within 1e-8).
    res.t = best_t.template cast<double>();
    res.gap = best_gap;
    res.pres = best_pres;
    res.dres = best_dres;
    if (res.status == SolveStatus::max_iter || res.status == SolveStatus::numerical) {
      const double abs_obj =
          std::abs(static_cast<double>(pobj(best_t) * obj_scale));
      const bool user_ok = best_pres <= opts.feas_tol && best_dres <= opts.feas_tol &&
                           best_gap <= opts.gap_tol * (1.0 + abs_obj);
      const bool contract_ok = best_pres <= 1e-8 && best_dres <= 1e-6 &&
                               best_gap <= 1e-7 * (1.0 + abs_obj);
      if (user_ok || contract_ok) {
        const std::string detail = res.message;
        res.status = SolveStatus::optimal;
        if (!user_ok) {
          std::ostringstream msg;
          msg << "converged to contract tolerances (gap=" << best_gap
              << ", pres=" << best_pres << ", dres=" << best_dres << "; " << detail
              << ")";
          res.message = msg.str();
        } else {
          res.message.clear();
        }
      }
    }
    return res;
  }
  res.t = t.template cast<double>();
  return res;
}

}  // namespace

// ---------------------------------------------------------------------------

void ConeProblem::validate() const {
  if (dim < 1) throw std::invalid_argument("cone problem dimension must be >= 1");
  auto check_hermitian = [&](const CMatrix& m, const char* what) {
    if (m.rows() != dim || m.cols() != dim) {
      std::ostringstream msg;
      msg << what << " must be " << dim << "x" << dim;
      throw std::invalid_argument(msg.str());
    }
    linalg::require_hermitian(m, 1e-10);
  };
  if (quad_objective.size() > 0) check_hermitian(quad_objective, "quad_objective");
  if (lift_objective.size() > 0) {
    if (!lmi) throw std::invalid_argument("lift_objective requires the lmi block");
    check_hermitian(lift_objective, "lift_objective");
  }
  if (quad_objective.size() == 0 && lift_objective.size() == 0) {
    throw std::invalid_argument("problem has no objective");
  }
  if (equalities.empty()) {
    throw std::invalid_argument("at least one equality is required");
  }
  for (const auto& [row, rhs] : equalities) {
    (void)rhs;
    if (row.size() != dim) throw std::invalid_argument("equality row has wrong dimension");
  }
  if (!trace_ineqs.empty() && !lmi) {
    throw std::invalid_argument("trace inequalities require the lmi block");
  }
  for (const auto& g : trace_ineqs) check_hermitian(g, "trace inequality matrix");
  for (const auto& soc : socs) {
    if (soc.row.size() != dim) throw std::invalid_argument("soc row has wrong dimension");
    if (!(soc.radius >= 0.0)) throw std::invalid_argument("soc radius must be >= 0");
  }
  for (const auto& [row, rhs] : halfspaces) {
    (void)rhs;
    if (row.size() != dim) throw std::invalid_argument("halfspace row has wrong dimension");
  }
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal:
      return "optimal";
    case SolveStatus::max_iter:
      return "max_iter";
    case SolveStatus::infeasible:
      return "infeasible";
    case SolveStatus::numerical:
      return "numerical";
  }
  return "unknown";
}

namespace {

// If the minimizer subject to the equalities alone already satisfies every
// cone constraint, it attains the unconstrained lower bound and is provably
// optimal (for the lifted form, tr(W P) >= w^H P w with equality at
// W = w w^H). Returns the certified solution or nullopt.
std::optional<ConeSolution> presolve_unconstrained(const ConeProblem& problem) {
  const int n = problem.dim;
  CMatrix q_total = CMatrix::Zero(n, n);
  if (problem.quad_objective.size() > 0) q_total += problem.quad_objective;
  if (problem.lift_objective.size() > 0) q_total += problem.lift_objective;

  // Complex equality solve via the same nullspace route as the main path.
  CMatrix rows(problem.equalities.size(), n);
  CVector rhs(problem.equalities.size());
  for (std::size_t i = 0; i < problem.equalities.size(); ++i) {
    rows.row(static_cast<Eigen::Index>(i)) = problem.equalities[i].first.adjoint();
    rhs(static_cast<Eigen::Index>(i)) = problem.equalities[i].second;
  }
  Eigen::JacobiSVD<CMatrix> svd(rows, Eigen::ComputeThinU | Eigen::ComputeFullV);
  const RVector& sv = svd.singularValues();
  const double tol = 1e-12 * std::max(1.0, sv.size() > 0 ? sv(0) : 0.0);
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol) ++rank;
  }
  CVector inv = CVector::Zero(sv.size());
  for (int i = 0; i < rank; ++i) inv(i) = Complex(1.0 / sv(i), 0.0);
  const CVector w0 = svd.matrixV().leftCols(sv.size()) * inv.asDiagonal() *
                     svd.matrixU().adjoint() * rhs;
  if ((rows * w0 - rhs).cwiseAbs().maxCoeff() >
      1e-9 * std::max(1.0, rhs.cwiseAbs().maxCoeff())) {
    return std::nullopt;  // main path reports infeasibility
  }
  const CMatrix nullbasis = svd.matrixV().rightCols(n - rank);

  CVector w = w0;
  if (nullbasis.cols() > 0) {
    const CMatrix qn = nullbasis.adjoint() * q_total * nullbasis;
    const CVector qb = nullbasis.adjoint() * (q_total * w0);
    Eigen::LDLT<CMatrix> ldlt(qn);
    if (ldlt.info() != Eigen::Success) return std::nullopt;
    w = w0 - nullbasis * ldlt.solve(qb);
  }

  const double wnorm2 = w.squaredNorm();
  for (const auto& gi : problem.trace_ineqs) {
    const double q = (w.adjoint() * gi * w)(0).real();
    if (q > 1e-10 * gi.cwiseAbs().maxCoeff() * wnorm2) return std::nullopt;
  }
  for (const auto& soc : problem.socs) {
    const double lhs = std::abs((soc.row.adjoint() * w)(0));
    if (lhs > soc.radius + 1e-10 * (1.0 + soc.row.norm() * w.norm())) {
      return std::nullopt;
    }
  }
  for (const auto& [row, rhs] : problem.halfspaces) {
    const double lhs = ((row.adjoint() * w)(0)).real();
    if (lhs < rhs - 1e-10 * (1.0 + row.norm() * w.norm())) return std::nullopt;
  }

  ConeSolution sol;
  sol.w = w;
  if (problem.lmi) sol.W = w * w.adjoint();
  sol.status = SolveStatus::optimal;
  sol.iterations = 0;
  sol.duality_gap = 0.0;
  sol.message = "equality-constrained optimum satisfies all cone constraints";
  IterationRecord rec;
  rec.primal_objective = (w.adjoint() * q_total * w)(0).real();
  rec.dual_objective = rec.primal_objective;
  sol.trace.push_back(rec);
  return sol;
}

}  // namespace

ConeSolution solve(const ConeProblem& problem, const SolverOptions& opts) {
  problem.validate();

  if (problem.lmi || !problem.trace_ineqs.empty() || !problem.socs.empty()) {
    if (auto pre = presolve_unconstrained(problem)) {
      ConeSolution sol = std::move(*pre);
      double obj = 0.0;
      double real_obj = 0.0;
      if (problem.quad_objective.size() > 0) {
        obj += (sol.w.adjoint() * problem.quad_objective * sol.w)(0).real();
        RVector u(2 * problem.dim);
        u << sol.w.real(), sol.w.imag();
        real_obj += u.dot(linalg::realify(problem.quad_objective) * u);
      }
      if (problem.lift_objective.size() > 0) {
        obj += (sol.W * problem.lift_objective).trace().real();
        real_obj +=
            (linalg::realify(sol.W) * linalg::realify(problem.lift_objective)).trace();
      }
      sol.objective = obj;
      sol.realified_objective = real_obj;
      return sol;
    }
  }

  const RealProblem rp = translate(problem);
  const Reduced red = eliminate_equalities(rp);

  ConeSolution sol;
  if (!red.consistent) {
    sol.status = SolveStatus::infeasible;
    sol.message = "inconsistent equality constraints";
    sol.w = CVector::Zero(problem.dim);
    if (problem.lmi) sol.W = CMatrix::Zero(problem.dim, problem.dim);
    return sol;
  }

  IpmResult ipm = run_ipm<double>(red, rp.blocks, rp.cone_degree, rp.obj_scale, opts);
  const auto met_targets = [&](const IpmResult& r) {
    if (r.status != SolveStatus::optimal) return false;
    if (r.trace.empty()) return true;
    const double abs_obj = std::abs(r.trace.back().primal_objective);
    return r.pres <= opts.feas_tol && r.dres <= opts.feas_tol &&
           r.gap <= opts.gap_tol * (1.0 + abs_obj);
  };
  if (!met_targets(ipm) && ipm.status != SolveStatus::infeasible) {
    // Double precision floors near sqrt(eps) on weakly active instances;
    // escalate the whole iteration to long double with tighter targets.
    SolverOptions wide_opts = opts;
    wide_opts.gap_tol = std::max(opts.gap_tol / 10.0, 1e-11);
    wide_opts.feas_tol = std::max(opts.feas_tol / 10.0, 1e-11);
    IpmResult wide =
        run_ipm<long double>(red, rp.blocks, rp.cone_degree, rp.obj_scale, wide_opts);
    const bool wide_better =
        (wide.status == SolveStatus::optimal && ipm.status != SolveStatus::optimal) ||
        (wide.status == SolveStatus::optimal && wide.gap <= ipm.gap) ||
        (ipm.status != SolveStatus::optimal &&
         std::max({wide.pres, wide.dres}) <= std::max({ipm.pres, ipm.dres}) &&
         wide.gap <= ipm.gap);
    if (wide_better) ipm = std::move(wide);
  }

  const RVector x = red.x0 + red.basis * ipm.t;
  sol.w.resize(problem.dim);
  for (int i = 0; i < problem.dim; ++i) {
    sol.w(i) = Complex(x(rp.lay.re(i)), x(rp.lay.im(i)));
  }
  if (problem.lmi) sol.W = theta_to_hermitian(rp.lay, x);

  double obj = 0.0;
  double real_obj = 0.0;
  if (problem.quad_objective.size() > 0) {
    const double quad = (sol.w.adjoint() * problem.quad_objective * sol.w)(0).real();
    obj += quad;
    const RVector u = x.head(2 * problem.dim);
    real_obj += u.dot(linalg::realify(problem.quad_objective) * u);
  }
  if (problem.lift_objective.size() > 0) {
    obj += (sol.W * problem.lift_objective).trace().real();
    real_obj += (linalg::realify(sol.W) * linalg::realify(problem.lift_objective)).trace();
  }
  sol.objective = obj;
  sol.realified_objective = real_obj;
  sol.duality_gap = ipm.gap;
  sol.primal_residual = ipm.pres;
  sol.dual_residual = ipm.dres;
  sol.status = ipm.status;
  sol.iterations = ipm.iterations;
  sol.kkt_condition = ipm.kkt_condition;
  sol.trace = std::move(ipm.trace);
  sol.message = std::move(ipm.message);
  return sol;
}

RankGap extract_rank_gap(const ConeSolution& sol) {
  if (sol.W.size() == 0) {
    throw std::invalid_argument("rank gap requires a solution with the lmi block");
  }
  RankGap rg;
  const CMatrix gap = sol.W - sol.w * sol.w.adjoint();
  Eigen::SelfAdjointEigenSolver<CMatrix> es_gap(gap, Eigen::EigenvaluesOnly);
  rg.gap_matrix_norm = es_gap.eigenvalues().cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<CMatrix> es_w(sol.W, Eigen::EigenvaluesOnly);
  const RVector ev = es_w.eigenvalues();
  const double top = ev(ev.size() - 1);
  const double second = ev.size() > 1 ? ev(ev.size() - 2) : 0.0;
  rg.top_eigen_ratio = std::abs(top) > 0.0 ? second / top : 1.0;
  return rg;
}

namespace {
void dump_cmatrix(const CMatrix& m, std::ostream& os) {
  os << m.rows() << " " << m.cols() << "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      os << m(i, j).real() << " " << m(i, j).imag() << (j + 1 == m.cols() ? "" : " ");
    }
    os << "\n";
  }
}
}  // namespace

void dump_problem(const ConeProblem& problem, std::ostream& os) {
  os << "cone-problem\n";
  os << "dim " << problem.dim << "\n";
  os << "lmi " << (problem.lmi ? 1 : 0) << "\n";
  os << "quad_objective " << (problem.quad_objective.size() > 0 ? 1 : 0) << "\n";
  if (problem.quad_objective.size() > 0) dump_cmatrix(problem.quad_objective, os);
  os << "lift_objective " << (problem.lift_objective.size() > 0 ? 1 : 0) << "\n";
  if (problem.lift_objective.size() > 0) dump_cmatrix(problem.lift_objective, os);
  os << "equalities " << problem.equalities.size() << "\n";
  for (const auto& [row, rhs] : problem.equalities) {
    for (Eigen::Index i = 0; i < row.size(); ++i) {
      os << row(i).real() << " " << row(i).imag() << " ";
    }
    os << rhs.real() << " " << rhs.imag() << "\n";
  }
  os << "trace_ineqs " << problem.trace_ineqs.size() << "\n";
  for (const auto& g : problem.trace_ineqs) dump_cmatrix(g, os);
  os << "socs " << problem.socs.size() << "\n";
  for (const auto& soc : problem.socs) {
    for (Eigen::Index i = 0; i < soc.row.size(); ++i) {
      os << soc.row(i).real() << " " << soc.row(i).imag() << " ";
    }
    os << soc.radius << "\n";
  }
  os << "halfspaces " << problem.halfspaces.size() << "\n";
  for (const auto& [row, rhs] : problem.halfspaces) {
    for (Eigen::Index i = 0; i < row.size(); ++i) {
      os << row(i).real() << " " << row(i).imag() << " ";
    }
    os << rhs << "\n";
  }
}

}  // namespace rbb
