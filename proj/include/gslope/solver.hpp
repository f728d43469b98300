#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gslope/groups.hpp"
#include "gslope/sorted_l1.hpp"

namespace gslope {

struct SolveOptions {
  double dual_gap_tol = 1e-6;  // stopping: |gap| <= dual_gap_tol * (1 + |objective|)
  double infeas_tol = 1e-6;
  int max_iter = 20000;
  double sigma = 1.0;
  double lipschitz = 0.0;  // > 0 skips the internal power iteration
};

struct SolveResult {
  Eigen::VectorXd beta;     // a minimizer, length p
  Eigen::VectorXd effects;  // group effects, length m, nonnegative
  Eigen::VectorXd eta;      // solution in standardized coordinates, length ptilde
  std::vector<int> selected;  // groups with effect > 1e-10 * max effect
  int iterations = 0;
  double final_gap = 0.0;
  double final_infeasibility = 0.0;
  double objective = 0.0;
  bool converged = false;
};

// FISTA on the unit-weight standardized problem
//   min_eta 1/2 ||y - Xtilde M eta||^2 + J_{sigma lambda}(block norms of eta),
// M block-diagonal with w_i^{-1} I_{l_i}. beta is recovered per group through
// the minimum-norm solution of R_i beta_{I_i} = c_{II_i}.
SolveResult solve_gslope(const GroupedDesign& design, const LambdaSequence& lambda,
                         const Eigen::VectorXd& y, const SolveOptions& opts = {});

// Same, warm-started from a previous eta (used by the sigma-estimation loop).
SolveResult solve_gslope(const GroupedDesign& design, const LambdaSequence& lambda,
                         const Eigen::VectorXd& y, const SolveOptions& opts,
                         const Eigen::VectorXd* warm_eta);

// Exact fast path when the groups are mutually orthogonal (validated to 1e-8):
// reduces to a diagonal problem in the group norms of Xtilde' y.
SolveResult solve_orthogonal(const GroupedDesign& design, const LambdaSequence& lambda,
                             const Eigen::VectorXd& y, const SolveOptions& opts = {});

// rho(eta) = (Xtilde M eta)'(y - Xtilde M eta) - J_{sigma lambda}(block norms);
// zero at any optimum. Zero gap alone must not stop a solver (eta = 0 has zero
// gap but can be dual-infeasible), so solvers also test infeasibility.
double duality_gap(const Eigen::VectorXd& eta, const Eigen::VectorXd& y,
                   const GroupedDesign& design, const LambdaSequence& lambda,
                   double sigma);

// max(J^D_lambda(block norms of M Xtilde' mu) - 1, 0) for the effective
// (already sigma-scaled) sequence.
double infeasibility(const Eigen::VectorXd& mu, const GroupedDesign& design,
                     const LambdaSequence& lambda);

// Squared spectral norm of Xtilde M by power iteration (tol 1e-6, <= 500 its).
double lipschitz_estimate(const GroupedDesign& design);

}  // namespace gslope
