#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gslope/sorted_l1.hpp"

namespace gslope {

// Worst-case sequence: entry i = max_j chi_quantile(l_j, 1 - q i/m) / w_j.
LambdaSequence lambda_max(double q, const Eigen::VectorXd& weights,
                          const std::vector<int>& ranks, int m);

// Rank-mixture sequence: entry r is the quantile of the equally weighted
// mixture of w_j^{-1}-scaled chi_{l_j} distributions at 1 - q r/m.
LambdaSequence lambda_mean(double q, const Eigen::VectorXd& weights,
                           const std::vector<int>& ranks, int m);

// Shrinkage-corrected sequence for independent Gaussian designs: entry 1 is
// the mixture quantile; later entries inflate component scales by
// S_j = sqrt((n - l_j(i-1))/n + w_j^2 ||lambda^S||^2 / (n - l_j(i-1) - 1))
// and flatten to a constant tail on the first monotonicity or denominator
// failure.
LambdaSequence lambda_corrected(double q, const Eigen::VectorXd& weights,
                                const std::vector<int>& ranks, int m, int n);

}  // namespace gslope
