// Copyright 2026 the rbb-toolkit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rbb/beamformer.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace rbb {

namespace {

Complex left_elem(const CVector& v) { return v(0); }
Complex right_elem(const CVector& v) { return v(v.size() - 1); }

// Distortionless rows: a~_1^H w = a_L^*, a~_2^H w = a_R^*, which is
// w_L^H a = a_L and w_R^H a = a_R (the convention the closed form satisfies,
// and the one that preserves the target ITF).
void append_distortionless(ConeProblem& prob, const CVector& a) {
  const Eigen::Index m = a.size();
  CVector a1 = CVector::Zero(2 * m);
  CVector a2 = CVector::Zero(2 * m);
  a1.head(m) = a;
  a2.tail(m) = a;
  prob.equalities.emplace_back(a1, std::conj(left_elem(a)));
  prob.equalities.emplace_back(a2, std::conj(right_elem(a)));
}

// Row c with c^H w = conj(b_R w_L^H b - b_L w_R^H b); |c^H w| <= rho models
// the relaxed ITF constraint with a fixed denominator, and c^H w = 0 the
// eps = 0 equality.
CVector itf_soc_row(const CVector& b) {
  const Eigen::Index m = b.size();
  CVector c(2 * m);
  c.head(m) = right_elem(b) * b;
  c.tail(m) = -left_elem(b) * b;
  return c;
}

FilterBin from_stacked(const CVector& w, const CMatrix& p_lift) {
  const Eigen::Index m = w.size() / 2;
  FilterBin fb;
  fb.w_left = w.head(m);
  fb.w_right = w.tail(m);
  fb.power = (w.adjoint() * p_lift * w)(0).real();
  return fb;
}

bool satisfies_bounds(const FilterBin& fb, const RelaxationSpec& spec,
                      const std::vector<double>& bounds) {
  for (std::size_t i = 0; i < spec.constraint_atfs.size(); ++i) {
    const auto err = itf_error(fb, spec.constraint_atfs[i]);
    if (!err.has_value()) return false;  // undefined ITF counts as a violation
    if (*err > bounds[i] + kItfFeasTol) return false;
  }
  return true;
}

}  // namespace

CMatrix lift_block_diag(const CMatrix& p) {
  linalg::require_hermitian(p, 1e-9);
  const Eigen::Index m = p.rows();
  CMatrix lifted = CMatrix::Zero(2 * m, 2 * m);
  lifted.topLeftCorner(m, m) = p;
  lifted.bottomRightCorner(m, m) = p;
  return lifted;
}

CVector FilterBin::stacked() const {
  CVector w(w_left.size() + w_right.size());
  w.head(w_left.size()) = w_left;
  w.tail(w_right.size()) = w_right;
  return w;
}

SolverOptions design_solver_options() {
  SolverOptions opts;
  opts.max_iter = 200;
  opts.gap_tol = 1e-9;
  opts.feas_tol = 1e-9;
  return opts;
}

FilterBin bmvdr(const CMatrix& p_n, const CVector& a) {
  if (a.size() != p_n.rows()) throw std::invalid_argument("bmvdr dimension mismatch");
  if (a.norm() == 0.0) throw std::invalid_argument("bmvdr target vector is zero");
  const Complex a_l = left_elem(a);
  const Complex a_r = right_elem(a);
  if (std::abs(a_l) == 0.0 && std::abs(a_r) == 0.0) {
    throw std::invalid_argument("bmvdr reference elements are both zero");
  }
  Eigen::LDLT<CMatrix> ldlt(p_n);
  if (ldlt.info() != Eigen::Success) {
    throw std::invalid_argument("bmvdr noise cpsd factorization failed");
  }
  const CVector x = ldlt.solve(a);
  const double denom = (a.adjoint() * x)(0).real();
  if (!(denom > 0.0)) {
    throw std::invalid_argument("bmvdr noise cpsd is not positive definite");
  }
  FilterBin fb;
  fb.w_left = x * (std::conj(a_l) / denom);
  fb.w_right = x * (std::conj(a_r) / denom);
  fb.path = 'b';
  fb.solves = 0;
  fb.objective = (std::norm(a_l) + std::norm(a_r)) / denom;
  fb.power = fb.objective;
  return fb;
}

std::optional<Complex> itf_in(const CVector& b) {
  const Complex b_r = right_elem(b);
  if (std::abs(b_r) == 0.0) return std::nullopt;
  return left_elem(b) / b_r;
}

std::optional<Complex> itf_out(const FilterBin& filter, const CVector& b) {
  const Complex denom = (filter.w_right.adjoint() * b)(0);
  if (std::abs(denom) == 0.0) return std::nullopt;
  const Complex numer = (filter.w_left.adjoint() * b)(0);
  return numer / denom;
}

std::optional<double> itf_error(const FilterBin& filter, const CVector& b) {
  const auto in = itf_in(b);
  const auto out = itf_out(filter, b);
  if (!in.has_value() || !out.has_value()) return std::nullopt;
  return std::abs(*out - *in);
}

double bmvdr_itf_error(const CVector& a, const CVector& b) {
  const Complex a_r = right_elem(a);
  const Complex b_r = right_elem(b);
  if (std::abs(a_r) == 0.0 || std::abs(b_r) == 0.0) {
    throw std::invalid_argument("undefined input ITF (zero right reference element)");
  }
  return std::abs(left_elem(a) / a_r - left_elem(b) / b_r);
}

RelaxationSpec epsilon_bounds(double c, const CVector& a,
                              const std::vector<CVector>& constraint_atfs,
                              double slack, int k_max) {
  if (!(c >= 0.0 && c <= 1.0)) {
    std::ostringstream msg;
    msg << "relaxation factor c = " << c << " outside [0, 1]";
    throw std::invalid_argument(msg.str());
  }
  if (!(slack > 0.0 && slack < 0.1)) {
    std::ostringstream msg;
    msg << "hybrid slack " << slack << " outside (0, 0.1)";
    throw std::invalid_argument(msg.str());
  }
  RelaxationSpec spec;
  spec.c = c;
  spec.slack = slack;
  spec.k_max = k_max;
  spec.constraint_atfs = constraint_atfs;
  spec.eps.reserve(constraint_atfs.size());
  spec.eps_tilde.reserve(constraint_atfs.size());
  for (const auto& b : constraint_atfs) {
    const double base = bmvdr_itf_error(a, b);
    spec.eps.push_back(c * base);
    spec.eps_tilde.push_back((c + slack) * base);
  }
  return spec;
}

CMatrix constraint_matrix(const CVector& b, double eps) {
  if (b.norm() == 0.0) throw std::invalid_argument("constraint vector is zero");
  if (eps < 0.0) throw std::invalid_argument("negative eps");
  const Eigen::Index m = b.size();
  const CMatrix outer = b * b.adjoint();
  const Complex b_l = left_elem(b);
  const Complex b_r = right_elem(b);
  CMatrix mi(2 * m, 2 * m);
  mi.topLeftCorner(m, m) = std::norm(b_r) * outer;
  mi.topRightCorner(m, m) = -std::conj(b_l) * b_r * outer;
  mi.bottomLeftCorner(m, m) = mi.topRightCorner(m, m).adjoint();
  mi.bottomRightCorner(m, m) = (std::norm(b_l) - std::norm(b_r) * eps * eps) * outer;
  return mi;
}

FilterBin sdcr_solve(const CMatrix& p_lift, const CVector& a, const RelaxationSpec& spec,
                     const SolverOptions& opts) {
  const Eigen::Index m2 = p_lift.rows();
  const Eigen::Index m = m2 / 2;
  ConeProblem prob;
  prob.dim = static_cast<int>(m2);
  prob.lmi = true;
  prob.lift_objective = p_lift;
  append_distortionless(prob, a);
  for (std::size_t i = 0; i < spec.constraint_atfs.size(); ++i) {
    const CVector& b = spec.constraint_atfs[i];
    if (spec.eps[i] > 0.0) {
      prob.trace_ineqs.push_back(constraint_matrix(b, spec.eps[i]));
    } else {
      // eps = 0 collapses the quadratic constraint to a linear equality.
      prob.equalities.emplace_back(itf_soc_row(b), Complex(0.0, 0.0));
    }
  }

  const ConeSolution sol = solve(prob, opts);
  if (sol.status != SolveStatus::optimal) {
    FilterBin fb = bmvdr(p_lift.topLeftCorner(m, m), a);
    fb.solves = 1;
    fb.converged = false;
    fb.fallback = true;
    fb.path = 'd';
    return fb;
  }
  FilterBin fb = from_stacked(sol.w, p_lift);
  fb.solves = 1;
  fb.converged = true;
  fb.path = 'd';
  fb.objective = sol.objective;
  const RankGap rg = extract_rank_gap(sol);
  fb.rank_gap = rg.gap_matrix_norm;
  fb.eigen_ratio = rg.top_eigen_ratio;
  return fb;
}

FilterBin sco_solve(const CMatrix& p_lift, const CVector& a, const RelaxationSpec& spec,
                    const SolverOptions& opts) {
  const Eigen::Index m = p_lift.rows() / 2;
  FilterBin iterate = bmvdr(p_lift.topLeftCorner(m, m), a);
  iterate.path = 's';

  const std::size_t n_constraints = spec.constraint_atfs.size();
  std::vector<CVector> rows;
  rows.reserve(n_constraints);
  for (const auto& b : spec.constraint_atfs) rows.push_back(itf_soc_row(b));

  // Smoothed right-reference responses stabilize the fixed-denominator
  // iteration; without them nearly-parallel constraints make the raw
  // denominators oscillate or collapse.
  std::vector<double> denom_bar(n_constraints, 0.0);

  for (int k = 1; k <= spec.k_max; ++k) {
    // Escalating shrink: bins that hover on the constraint boundary get
    // pushed strictly inside instead of cycling until k_max. As the shrink
    // grows the subproblem approaches the ITF-equality (LCMV) program whose
    // solution has zero ITF error, so termination is forced for m <= 2M - 3.
    const double shrink =
        k <= 8 ? 0.0 : std::min(0.9, 1e-5 * std::pow(4.0, k - 9));
    ConeProblem prob;
    prob.dim = static_cast<int>(2 * m);
    prob.quad_objective = p_lift;
    append_distortionless(prob, a);
    for (std::size_t i = 0; i < n_constraints; ++i) {
      const CVector& b = spec.constraint_atfs[i];
      if (spec.eps[i] > 0.0) {
        const Complex resp = (b.adjoint() * iterate.w_right)(0);  // b^H w_R
        denom_bar[i] =
            k == 1 ? std::abs(resp) : 0.5 * (denom_bar[i] + std::abs(resp));
        // |row^H w| = |b_R| |w_L^H b - (b_L/b_R) w_R^H b|, so the fixed
        // denominator bound carries the same |b_R| factor.
        prob.socs.push_back({rows[i], spec.eps[i] * (1.0 - shrink) *
                                          std::abs(right_elem(b)) * denom_bar[i]});
        // Keep the new response aligned with the previous phase so the
        // denominator cannot collapse through zero.
        if (std::abs(resp) > 1e-12 * (1.0 + b.norm() * iterate.w_right.norm())) {
          CVector hrow = CVector::Zero(2 * m);
          hrow.tail(m) = std::polar(1.0, std::arg(resp)) * b;
          prob.halfspaces.emplace_back(hrow, 0.5 * std::abs(resp));
        }
      } else {
        prob.equalities.emplace_back(rows[i], Complex(0.0, 0.0));
      }
    }
    ConeSolution sol = solve(prob, opts);
    if (sol.status != SolveStatus::optimal && !prob.halfspaces.empty()) {
      // The stabilizing half-spaces can over-restrict a tight bin; retry the
      // plain subproblem once before giving up.
      prob.halfspaces.clear();
      sol = solve(prob, opts);
    }
    if (sol.status != SolveStatus::optimal) {
      iterate.solves = k;
      iterate.converged = false;
      iterate.fallback = true;
      iterate.path = 's';
      return iterate;
    }
    FilterBin next = from_stacked(sol.w, p_lift);
    next.path = 's';
    next.objective = sol.objective;
    next.solves = k;
    if (satisfies_bounds(next, spec, spec.eps)) {
      next.converged = true;
      return next;
    }
    iterate = next;
  }
  iterate.converged = false;
  iterate.solves = spec.k_max;
  return iterate;
}

FilterBin hybrid_solve(const CMatrix& p_lift, const CVector& a, const RelaxationSpec& spec,
                       const SolverOptions& opts) {
  FilterBin first = sdcr_solve(p_lift, a, spec, opts);
  if (!first.fallback && satisfies_bounds(first, spec, spec.eps_tilde)) {
    return first;  // solves == 1
  }
  FilterBin second = sco_solve(p_lift, a, spec, opts);
  second.solves += 1;  // the SDCR attempt counts
  second.path = 's';
  return second;
}

std::pair<StftGrid, StftGrid> apply_filters(const FilterTable& filters,
                                            const std::vector<StftGrid>& channels) {
  if (channels.empty()) throw std::invalid_argument("no input channels");
  const int frames = channels.front().num_frames;
  const int bins = channels.front().num_bins;
  for (const auto& ch : channels) {
    if (ch.num_frames != frames || ch.num_bins != bins) {
      throw std::invalid_argument("channel grids disagree in size");
    }
  }
  if (static_cast<int>(filters.size()) != bins) {
    throw std::invalid_argument("filter table does not cover all bins");
  }
  const Eigen::Index m = static_cast<Eigen::Index>(channels.size());
  for (const auto& fb : filters) {
    if (fb.w_left.size() != m || fb.w_right.size() != m) {
      throw std::invalid_argument("filter length does not match channel count");
    }
  }

  StftGrid left{frames, bins, CMatrix::Zero(frames, bins)};
  StftGrid right{frames, bins, CMatrix::Zero(frames, bins)};
  for (int k = 0; k < bins; ++k) {
    const FilterBin& fb = filters[k];
    for (Eigen::Index ch = 0; ch < m; ++ch) {
      left.coef.col(k) += std::conj(fb.w_left(ch)) * channels[ch].coef.col(k);
      right.coef.col(k) += std::conj(fb.w_right(ch)) * channels[ch].coef.col(k);
    }
  }
  return {std::move(left), std::move(right)};
}

}  // namespace rbb
