// Copyright 2026 the rbb-toolkit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef RBB_BEAMFORMER_HPP
#define RBB_BEAMFORMER_HPP

#include <optional>
#include <vector>

#include "rbb/cone_solver.hpp"
#include "rbb/linalg.hpp"
#include "rbb/stft.hpp"

namespace rbb {

// ATF/RATF vectors handed to this module are in canonical order: element 0
// is the left reference microphone, element M-1 the right reference.

// [[P, 0], [0, P]], the 2M x 2M block lift of a noise CPSD.
CMatrix lift_block_diag(const CMatrix& p);

// One frequency bin of a binaural filter pair plus design diagnostics.
struct FilterBin {
  CVector w_left, w_right;  // length M each
  int solves = 0;           // convex solves consumed for this bin
  bool converged = true;
  bool fallback = false;  // solver failure, BMVDR substituted
  char path = 'b';        // method that produced the filter: b/d/s
  double objective = 0.0;  // designed objective (tr(W P) for sdcr, w^H P w else)
  double power = 0.0;      // true filtered noise power w^H P w
  double rank_gap = 0.0;
  double eigen_ratio = 0.0;

  CVector stacked() const;  // [w_left; w_right]
};

using FilterTable = std::vector<FilterBin>;  // indexed by frequency bin

struct RelaxationSpec {
  double c = 0.5;
  double slack = 0.05;  // hybrid switching slack, in (0, 0.1)
  int k_max = 50;
  std::vector<CVector> constraint_atfs;  // m entries
  std::vector<double> eps;               // c * BMVDR ITF error per constraint
  std::vector<double> eps_tilde;         // (c + slack) * BMVDR ITF error
};

// Tolerance for "ITF error satisfies its bound" checks, matching the solver
// gap scale.
inline constexpr double kItfFeasTol = 1e-8;

SolverOptions design_solver_options();

// Closed-form binaural MVDR (one bin). Throws when both reference elements
// of a vanish or P_n is singular beyond repair.
FilterBin bmvdr(const CMatrix& p_n, const CVector& a);

// b_L / b_R; empty when the right reference element is zero.
std::optional<Complex> itf_in(const CVector& b);
// (w_L^H b) / (w_R^H b); empty when the filtered right response is zero.
std::optional<Complex> itf_out(const FilterBin& filter, const CVector& b);
// |ITF_out - ITF_in|; empty when either ratio is undefined.
std::optional<double> itf_error(const FilterBin& filter, const CVector& b);

// |a_L/a_R - b_L/b_R|, the closed-form BMVDR ITF error.
double bmvdr_itf_error(const CVector& a, const CVector& b);

// eps_i = c * bmvdr_itf_error(a, b_i); eps_tilde_i = (c + slack) * same.
RelaxationSpec epsilon_bounds(double c, const CVector& a,
                              const std::vector<CVector>& constraint_atfs,
                              double slack = 0.05, int k_max = 50);

// The 2M x 2M quadratic-constraint matrix with blocks
//   A = |b_R|^2 b b^H, B = -b_L^* b_R b b^H, C = (|b_L|^2 - |b_R|^2 eps^2) b b^H;
// indefinite whenever eps > 0 and b != 0.
CMatrix constraint_matrix(const CVector& b, double eps);

// Semi-definite relaxation: one convex solve per bin; returns the extracted
// w plus rank-gap diagnostics. Solver failure falls back to BMVDR (flagged).
FilterBin sdcr_solve(const CMatrix& p_lift, const CVector& a, const RelaxationSpec& spec,
                     const SolverOptions& opts = design_solver_options());

// Successive convex optimization: fixed-denominator subproblems from the
// BMVDR start until every relaxed constraint holds, at most k_max solves.
FilterBin sco_solve(const CMatrix& p_lift, const CVector& a, const RelaxationSpec& spec,
                    const SolverOptions& opts = design_solver_options());

// SDCR first; falls back to SCO when the slackened switching criterion
// (eps_tilde bounds) fails on the extracted point.
FilterBin hybrid_solve(const CMatrix& p_lift, const CVector& a, const RelaxationSpec& spec,
                       const SolverOptions& opts = design_solver_options());

// Per-bin inner products of the filters with an M-channel STFT grid.
std::pair<StftGrid, StftGrid> apply_filters(const FilterTable& filters,
                                            const std::vector<StftGrid>& channels);

}  // namespace rbb

#endif  // RBB_BEAMFORMER_HPP
