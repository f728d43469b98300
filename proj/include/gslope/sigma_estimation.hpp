#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gslope/groups.hpp"
#include "gslope/solver.hpp"

namespace gslope {

struct SigmaEstimationResult {
  SolveResult result;
  double sigma_hat = 0.0;
  std::vector<std::vector<int>> trace;  // variable support after each solve
  bool converged = false;               // false on cycle or iteration cap
};

// Alternates noise-level estimation and solving: sigma_hat^2 = RSS(S)/(n-|S|-1)
// with S the currently selected variables (RSS(empty) = ||y||^2, no intercept),
// then re-solves with sigma_hat until the support is a fixed point. A repeated
// support (cycle) returns the smallest-sigma_hat iterate of the cycle, flagged
// non-converged; the iteration cap is 100.
SigmaEstimationResult solve_with_sigma_estimation(const GroupedDesign& design,
                                                  const LambdaSequence& lambda,
                                                  const Eigen::VectorXd& y,
                                                  const SolveOptions& opts = {});

}  // namespace gslope
