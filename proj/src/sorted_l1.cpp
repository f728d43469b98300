#include "gslope/sorted_l1.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace gslope {

namespace {

void check_same_size(const LambdaSequence& lambda, const Eigen::VectorXd& x,
                     const char* what) {
  if (lambda.size() != x.size())
    throw std::invalid_argument(std::string(what) +
                                ": lambda and vector lengths differ");
}

std::vector<int> magnitude_order(const Eigen::VectorXd& x) {
  std::vector<int> order(static_cast<std::size_t>(x.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&x](int a, int b) {
    return std::abs(x[a]) > std::abs(x[b]);
  });
  return order;
}

}  // namespace

LambdaSequence::LambdaSequence(Eigen::VectorXd v, LambdaKind k)
    : values(std::move(v)), kind(k) {
  if (values.size() == 0)
    throw std::invalid_argument("LambdaSequence: empty sequence");
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 0.0) || !std::isfinite(values[i]))
      throw std::invalid_argument("LambdaSequence: entries must be finite and nonnegative");
    if (i > 0 && values[i] > values[i - 1])
      throw std::invalid_argument("LambdaSequence: entries must be nonincreasing");
  }
}

LambdaSequence LambdaSequence::scaled(double s) const {
  if (!(s >= 0.0)) throw std::invalid_argument("LambdaSequence::scaled: negative factor");
  return LambdaSequence(values * s, kind);
}

double sorted_l1_norm(const LambdaSequence& lambda, const Eigen::VectorXd& b) {
  check_same_size(lambda, b, "sorted_l1_norm");
  std::vector<double> mags(b.data(), b.data() + b.size());
  for (double& v : mags) v = std::abs(v);
  std::sort(mags.begin(), mags.end(), std::greater<double>());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) acc += lambda[i] * mags[static_cast<std::size_t>(i)];
  return acc;
}

// Stack-based pool-adjacent-violators pass on |y| sorted descending.
Eigen::VectorXd prox_sorted_l1(const LambdaSequence& lambda, const Eigen::VectorXd& y) {
  check_same_size(lambda, y, "prox_sorted_l1");
  const Eigen::Index n = y.size();
  std::vector<int> order = magnitude_order(y);

  std::vector<int> start(static_cast<std::size_t>(n)), end(static_cast<std::size_t>(n));
  std::vector<double> avg(static_cast<std::size_t>(n));
  int top = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    start[top] = static_cast<int>(k);
    end[top] = static_cast<int>(k);
    avg[top] = std::abs(y[order[static_cast<std::size_t>(k)]]) - lambda[k];
    ++top;
    while (top > 1 && avg[top - 2] <= avg[top - 1]) {
      int la = end[top - 2] - start[top - 2] + 1;
      int lb = end[top - 1] - start[top - 1] + 1;
      avg[top - 2] = (avg[top - 2] * la + avg[top - 1] * lb) / (la + lb);
      end[top - 2] = end[top - 1];
      --top;
    }
  }

  Eigen::VectorXd out(n);
  for (int b = 0; b < top; ++b) {
    double v = std::max(avg[b], 0.0);
    for (int k = start[b]; k <= end[b]; ++k) {
      int idx = order[static_cast<std::size_t>(k)];
      out[idx] = y[idx] < 0.0 ? -v : v;
    }
  }
  return out;
}

double dual_norm(const LambdaSequence& lambda, const Eigen::VectorXd& x) {
  check_same_size(lambda, x, "dual_norm");
  if (lambda[0] <= 0.0)
    throw std::domain_error("dual_norm: lambda must have a positive leading entry");
  std::vector<double> mags(x.data(), x.data() + x.size());
  for (double& v : mags) v = std::abs(v);
  std::sort(mags.begin(), mags.end(), std::greater<double>());
  double cum_x = 0.0, cum_l = 0.0, best = 0.0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    cum_x += mags[static_cast<std::size_t>(i)];
    cum_l += lambda[i];
    best = std::max(best, cum_x / cum_l);
  }
  return best;
}

bool in_dual_ball(const LambdaSequence& lambda, const Eigen::VectorXd& x, double tol) {
  if (tol < 0.0) throw std::invalid_argument("in_dual_ball: negative tolerance");
  return dual_norm(lambda, x) <= 1.0 + tol;
}

Eigen::VectorXd solve_diagonal_slope(const Eigen::VectorXd& d,
                                     const LambdaSequence& lambda,
                                     const Eigen::VectorXd& y, double gap_tol,
                                     double ball_tol, DiagonalSolveStats* stats) {
  check_same_size(lambda, y, "solve_diagonal_slope");
  if (d.size() != y.size())
    throw std::invalid_argument("solve_diagonal_slope: d and y lengths differ");
  for (Eigen::Index i = 0; i < d.size(); ++i)
    if (!(d[i] > 0.0))
      throw std::invalid_argument("solve_diagonal_slope: d entries must be positive");
  if (!(gap_tol > 0.0) || !(ball_tol > 0.0))
    throw std::invalid_argument("solve_diagonal_slope: tolerances must be positive");

  const Eigen::Index n = y.size();
  if (lambda[0] == 0.0) {
    // All-zero sequence: plain least squares with exact diagonal solution.
    if (stats) *stats = DiagonalSolveStats{0, 0.0, 0.0, 0.0, true};
    return y.cwiseQuotient(d);
  }

  const double L = d.cwiseAbs2().maxCoeff();
  const double t = 1.0 / L;
  const LambdaSequence tl = lambda.scaled(t);

  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd v = b;
  double theta = 1.0;
  double obj_prev = std::numeric_limits<double>::infinity();

  constexpr int kMaxIter = 50000;
  DiagonalSolveStats st;
  for (int iter = 1; iter <= kMaxIter; ++iter) {
    Eigen::VectorXd grad = d.cwiseProduct(d.cwiseProduct(v) - y);
    Eigen::VectorXd b_new = prox_sorted_l1(tl, v - t * grad);

    Eigen::VectorXd resid = y - d.cwiseProduct(b_new);
    double J = sorted_l1_norm(lambda, b_new);
    double obj = 0.5 * resid.squaredNorm() + J;
    double gap = d.cwiseProduct(b_new).dot(resid) - J;

    double theta_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    Eigen::VectorXd v_next = b_new + ((theta - 1.0) / theta_new) * (b_new - b);
    if (obj > obj_prev) {  // adaptive restart
      theta_new = 1.0;
      v_next = b_new;
    }
    obj_prev = obj;
    b = b_new;
    v = std::move(v_next);
    theta = theta_new;

    st.iterations = iter;
    st.gap = gap;
    st.objective = obj;
    if (std::abs(gap) <= gap_tol) {
      double excess = std::max(dual_norm(lambda, d.cwiseProduct(resid)) - 1.0, 0.0);
      st.infeasibility = excess;
      if (excess <= ball_tol) {
        st.converged = true;
        if (stats) *stats = st;
        return b;
      }
    }
  }
  st.converged = false;
  st.infeasibility =
      std::max(dual_norm(lambda, d.cwiseProduct(y - d.cwiseProduct(b))) - 1.0, 0.0);
  if (stats) *stats = st;
  return b;
}

Eigen::VectorXd solve_diagonal_slope(const Eigen::VectorXd& d,
                                     const LambdaSequence& lambda,
                                     const Eigen::VectorXd& y, double tol) {
  DiagonalSolveStats st;
  Eigen::VectorXd b = solve_diagonal_slope(d, lambda, y, tol, tol, &st);
  if (!st.converged)
    throw NonconvergenceError(
        "solve_diagonal_slope: iteration cap reached (gap " + std::to_string(st.gap) +
            ", infeasibility " + std::to_string(st.infeasibility) + ", iterations " +
            std::to_string(st.iterations) + ")",
        st.iterations, st.gap, st.infeasibility);
  return b;
}

}  // namespace gslope
