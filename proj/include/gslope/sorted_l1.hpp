#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace gslope {

enum class LambdaKind { max, mean, corrected, custom };

// Nonincreasing, nonnegative regularization sequence.
struct LambdaSequence {
  Eigen::VectorXd values;
  LambdaKind kind = LambdaKind::custom;

  LambdaSequence() = default;
  explicit LambdaSequence(Eigen::VectorXd v, LambdaKind k = LambdaKind::custom);

  Eigen::Index size() const { return values.size(); }
  double operator[](Eigen::Index i) const { return values[i]; }
  LambdaSequence scaled(double s) const;  // s >= 0 keeps the invariants
};

// J_lambda(b) = sum_i lambda_i |b|_(i), |b|_(1) >= |b|_(2) >= ...
double sorted_l1_norm(const LambdaSequence& lambda, const Eigen::VectorXd& b);

// argmin_b 1/2 ||b - y||^2 + J_lambda(b).
Eigen::VectorXd prox_sorted_l1(const LambdaSequence& lambda, const Eigen::VectorXd& y);

// J^D_lambda(x) = max_k (sum_{i<=k} |x|_(i)) / (sum_{i<=k} lambda_i).
// Requires lambda_1 > 0.
double dual_norm(const LambdaSequence& lambda, const Eigen::VectorXd& x);

// Membership of x in the unit ball of J^D_lambda, slack tol.
bool in_dual_ball(const LambdaSequence& lambda, const Eigen::VectorXd& x, double tol);

struct NonconvergenceError : std::runtime_error {
  NonconvergenceError(const std::string& msg, int iterations_in, double gap_in,
                      double infeasibility_in)
      : std::runtime_error(msg),
        iterations(iterations_in),
        gap(gap_in),
        infeasibility(infeasibility_in) {}
  int iterations;
  double gap;
  double infeasibility;
};

struct DiagonalSolveStats {
  int iterations = 0;
  double gap = 0.0;          // signed (Db).(y - Db) - J_lambda(b)
  double infeasibility = 0.0;  // max(J^D(d o (y - Db)) - 1, 0)
  double objective = 0.0;
  bool converged = false;
};

// argmin_b 1/2 ||y - diag(d) b||^2 + J_lambda(b), d > 0 entrywise.
// Converged when |gap| <= tol and d o (y - Db) lies in the dual ball at tol;
// throws NonconvergenceError (with diagnostics) after the iteration cap.
Eigen::VectorXd solve_diagonal_slope(const Eigen::VectorXd& d,
                                     const LambdaSequence& lambda,
                                     const Eigen::VectorXd& y, double tol);

// Same solver with separate gap/ball tolerances and stats reporting.
Eigen::VectorXd solve_diagonal_slope(const Eigen::VectorXd& d,
                                     const LambdaSequence& lambda,
                                     const Eigen::VectorXd& y, double gap_tol,
                                     double ball_tol, DiagonalSolveStats* stats);

}  // namespace gslope
