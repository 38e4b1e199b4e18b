// Copyright 2026 the rbb-toolkit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef RBB_CONE_SOLVER_HPP
#define RBB_CONE_SOLVER_HPP

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "rbb/linalg.hpp"

namespace rbb {

// |row^H w| <= radius, modeled as a 3-dimensional real second-order cone
// (radius, Re row^H w, Im row^H w). radius == 0 degenerates to the linear
// equality row^H w = 0 and is handled as such.
struct SocConstraint {
  CVector row;
  double radius = 0.0;
};

// Cone program over a complex vector w (dim entries) and, when lmi is set,
// a Hermitian lift W coupled through [[W, w], [w^H, 1]] >= 0:
//
//   minimize    w^H quad_objective w + tr(W lift_objective)
//   subject to  row_k^H w = rhs_k                  (equalities)
//               tr(W G_i) <= 0                     (trace_ineqs, lmi only)
//               |c_j^H w| <= rho_j                 (socs)
//               Re(row_l^H w) >= rhs_l             (halfspaces)
//               [[W, w], [w^H, 1]] >= 0            (lmi)
struct ConeProblem {
  int dim = 0;
  CMatrix quad_objective;  // empty when absent
  CMatrix lift_objective;  // empty when absent; requires lmi
  std::vector<std::pair<CVector, Complex>> equalities;
  std::vector<CMatrix> trace_ineqs;
  std::vector<SocConstraint> socs;
  std::vector<std::pair<CVector, double>> halfspaces;
  bool lmi = false;

  void validate() const;  // throws std::invalid_argument
};

enum class SolveStatus { optimal, max_iter, infeasible, numerical };
const char* to_string(SolveStatus status);

struct SolverOptions {
  int max_iter = 100;
  double gap_tol = 1e-7;   // duality gap <= gap_tol * (1 + |objective|)
  double feas_tol = 1e-8;  // relative primal/dual residual thresholds
  bool verbose = false;
};

struct IterationRecord {
  double primal_objective = 0.0;
  double dual_objective = 0.0;  // Lagrangian value at the current iterate
  double gap = 0.0;             // <s, z> in original objective units
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  // Weak duality (primal >= dual) holds up to this residual allowance.
  double residual_slack = 0.0;
};

struct ConeSolution {
  CVector w;
  CMatrix W;  // filled when the problem had the LMI block
  double objective = 0.0;
  // Objective evaluated on realified data (trace terms double); diagnostic
  // for the complex/real consistency checks.
  double realified_objective = 0.0;
  double duality_gap = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  SolveStatus status = SolveStatus::numerical;
  int iterations = 0;
  double kkt_condition = 0.0;  // estimate from the reduced-system factorization
  std::vector<IterationRecord> trace;
  std::string message;
};

// Primal-dual path-following interior-point solve. Complex data is realified
// internally and equalities are eliminated by nullspace parameterization;
// deterministic for fixed input and options.
ConeSolution solve(const ConeProblem& problem, const SolverOptions& opts = {});

struct RankGap {
  double gap_matrix_norm = 0.0;  // ||W - w w^H|| (spectral)
  double top_eigen_ratio = 0.0;  // lambda_2 / lambda_1 of W
};

// Tightness diagnostics of the lifted solution; requires an LMI solve.
RankGap extract_rank_gap(const ConeSolution& sol);

// Self-describing text dump (dimensions, then row-major complex entries)
// for cross-checking against external solvers.
void dump_problem(const ConeProblem& problem, std::ostream& os);

}  // namespace rbb

#endif  // RBB_CONE_SOLVER_HPP
