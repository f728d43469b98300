#include "gslope/sigma_estimation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace gslope {

namespace {

std::vector<int> selected_variables(const GroupedDesign& design, const SolveResult& res) {
  std::vector<int> vars;
  for (int gi : res.selected) {
    const auto& idx = design.partition.groups[static_cast<std::size_t>(gi)];
    vars.insert(vars.end(), idx.begin(), idx.end());
  }
  std::sort(vars.begin(), vars.end());
  return vars;
}

double rss_on_support(const GroupedDesign& design, const Eigen::VectorXd& y,
                      const std::vector<int>& S) {
  if (S.empty()) return y.squaredNorm();  // no intercept in the model
  Eigen::MatrixXd Xs(design.n(), static_cast<Eigen::Index>(S.size()));
  for (std::size_t j = 0; j < S.size(); ++j)
    Xs.col(static_cast<Eigen::Index>(j)) = design.X.col(S[j]);
  Eigen::VectorXd fitted = Xs * Xs.colPivHouseholderQr().solve(y);
  return (y - fitted).squaredNorm();
}

}  // namespace

SigmaEstimationResult solve_with_sigma_estimation(const GroupedDesign& design,
                                                  const LambdaSequence& lambda,
                                                  const Eigen::VectorXd& y,
                                                  const SolveOptions& opts) {
  const int n = design.n();
  if (n <= 1) throw std::invalid_argument("solve_with_sigma_estimation: need n > 1");
  if (y.size() != n)
    throw std::invalid_argument("solve_with_sigma_estimation: y length must equal n");

  const double sigma_floor = 1e-12 * std::max(1.0, y.norm() / std::sqrt(double(n)));

  SolveOptions base = opts;
  if (!(base.lipschitz > 0.0)) base.lipschitz = lipschitz_estimate(design);

  SigmaEstimationResult out;
  std::vector<int> S;
  std::map<std::vector<int>, int> first_seen;
  std::vector<double> sigmas;
  std::vector<SolveResult> iterates;
  const Eigen::VectorXd* warm = nullptr;

  for (int iter = 0; iter < 100; ++iter) {
    if (static_cast<int>(S.size()) >= n - 1)
      throw std::runtime_error("solve_with_sigma_estimation: support too large for sigma estimation");
    double rss = rss_on_support(design, y, S);
    double sigma_hat =
        std::max(std::sqrt(rss / (n - static_cast<int>(S.size()) - 1)), sigma_floor);

    SolveOptions o = base;
    o.sigma = sigma_hat;
    SolveResult res = solve_gslope(design, lambda, y, o, warm);
    std::vector<int> S_plus = selected_variables(design, res);

    out.trace.push_back(S_plus);
    sigmas.push_back(sigma_hat);
    iterates.push_back(res);

    if (S_plus == S) {
      out.result = std::move(iterates.back());
      out.sigma_hat = sigma_hat;
      out.converged = true;
      return out;
    }
    auto seen = first_seen.find(S_plus);
    if (seen != first_seen.end()) {
      // Support cycle: keep the smallest-sigma_hat iterate of the cycle.
      int best = seen->second;
      for (int j = seen->second; j < static_cast<int>(sigmas.size()); ++j)
        if (sigmas[static_cast<std::size_t>(j)] < sigmas[static_cast<std::size_t>(best)])
          best = j;
      out.result = std::move(iterates[static_cast<std::size_t>(best)]);
      out.sigma_hat = sigmas[static_cast<std::size_t>(best)];
      out.converged = false;
      return out;
    }
    first_seen[S_plus] = iter;
    S = std::move(S_plus);
    warm = &iterates.back().eta;
  }

  out.result = std::move(iterates.back());
  out.sigma_hat = sigmas.back();
  out.converged = false;
  return out;
}

}  // namespace gslope
