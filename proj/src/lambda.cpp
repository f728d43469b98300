#include "gslope/lambda.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>

#include "gslope/special_functions.hpp"

namespace gslope {

namespace {

void validate_args(double q, const Eigen::VectorXd& weights, const std::vector<int>& ranks,
                   int m, const char* what) {
  if (!(q > 0.0) || !(q < 1.0))
    throw std::domain_error(std::string(what) + ": q must be in (0, 1)");
  if (m < 1) throw std::invalid_argument(std::string(what) + ": m must be >= 1");
  if (weights.size() != m || static_cast<int>(ranks.size()) != m)
    throw std::invalid_argument(std::string(what) + ": weights and ranks must have length m");
  for (int l : ranks)
    if (l < 1) throw std::invalid_argument(std::string(what) + ": ranks must be >= 1");
  for (Eigen::Index j = 0; j < weights.size(); ++j)
    if (!(weights[j] > 0.0))
      throw std::invalid_argument(std::string(what) + ": weights must be positive");
}

double clamp_prob(double p) { return std::min(std::max(p, 1e-15), 1.0 - 1e-15); }

// Distinct (rank, scale) components with multiplicities; dedup keeps the
// corrected-sequence inner loop O(distinct sizes) instead of O(m) per evaluation.
struct WeightedMixture {
  std::vector<int> dof;
  std::vector<double> scale;
  std::vector<double> mass;  // sums to 1

  double cdf(double x) const {
    double acc = 0.0;
    for (std::size_t j = 0; j < dof.size(); ++j)
      acc += mass[j] * chi_cdf(dof[j], x / scale[j]);
    return acc;
  }
  double pdf(double x) const {
    double acc = 0.0;
    for (std::size_t j = 0; j < dof.size(); ++j)
      acc += mass[j] * chi_pdf(dof[j], x / scale[j]) / scale[j];
    return acc;
  }
  // Safeguarded Newton over a verified bracket.
  double quantile(double p) const {
    p = clamp_prob(p);
    double pp = clamp_prob(p + 0.5 * (1.0 - p));
    double hi = 0.0;
    for (std::size_t j = 0; j < dof.size(); ++j)
      hi = std::max(hi, scale[j] * chi_quantile(dof[j], pp));
    while (cdf(hi) < p) hi *= 2.0;
    double lo = 0.0, x = 0.5 * hi;
    for (int iter = 0; iter < 200; ++iter) {
      double f = cdf(x) - p;
      if (std::abs(f) <= 1e-13) return x;
      (f > 0.0 ? hi : lo) = x;
      double df = pdf(x);
      double xn = df > 0.0 ? x - f / df : x;
      x = (xn > lo && xn < hi) ? xn : 0.5 * (lo + hi);
      if (hi - lo <= 1e-15 * std::max(1.0, hi)) {
        if (std::abs(cdf(x) - p) <= 1e-10) return x;
        break;
      }
    }
    throw std::runtime_error("lambda: mixture quantile iteration cap reached");
  }
};

struct GroupKinds {
  std::vector<int> dof;
  std::vector<double> weight;
  std::vector<double> mass;
};

GroupKinds distinct_kinds(const Eigen::VectorXd& weights, const std::vector<int>& ranks) {
  std::map<std::pair<int, double>, int> counts;
  for (std::size_t j = 0; j < ranks.size(); ++j)
    counts[{ranks[j], weights[static_cast<Eigen::Index>(j)]}] += 1;
  GroupKinds k;
  const double total = static_cast<double>(ranks.size());
  for (const auto& [key, count] : counts) {
    k.dof.push_back(key.first);
    k.weight.push_back(key.second);
    k.mass.push_back(count / total);
  }
  return k;
}

}  // namespace

LambdaSequence lambda_max(double q, const Eigen::VectorXd& weights,
                          const std::vector<int>& ranks, int m) {
  validate_args(q, weights, ranks, m, "lambda_max");
  GroupKinds kinds = distinct_kinds(weights, ranks);
  Eigen::VectorXd lam(m);
  for (int i = 0; i < m; ++i) {
    double p = clamp_prob(1.0 - q * (i + 1) / m);
    double best = 0.0;
    for (std::size_t j = 0; j < kinds.dof.size(); ++j)
      best = std::max(best, chi_quantile(kinds.dof[j], p) / kinds.weight[j]);
    // nonincreasing mathematically; clamp inversion round-off
    lam[i] = i > 0 ? std::min(best, lam[i - 1]) : best;
  }
  return LambdaSequence(std::move(lam), LambdaKind::max);
}

LambdaSequence lambda_mean(double q, const Eigen::VectorXd& weights,
                           const std::vector<int>& ranks, int m) {
  validate_args(q, weights, ranks, m, "lambda_mean");
  GroupKinds kinds = distinct_kinds(weights, ranks);
  WeightedMixture mix;
  mix.dof = kinds.dof;
  mix.mass = kinds.mass;
  mix.scale.resize(kinds.weight.size());
  for (std::size_t j = 0; j < kinds.weight.size(); ++j) mix.scale[j] = 1.0 / kinds.weight[j];
  Eigen::VectorXd lam(m);
  for (int i = 0; i < m; ++i) {
    double v = mix.quantile(1.0 - q * (i + 1) / m);
    lam[i] = i > 0 ? std::min(v, lam[i - 1]) : v;
  }
  return LambdaSequence(std::move(lam), LambdaKind::mean);
}

LambdaSequence lambda_corrected(double q, const Eigen::VectorXd& weights,
                                const std::vector<int>& ranks, int m, int n) {
  validate_args(q, weights, ranks, m, "lambda_corrected");
  if (n < 1) throw std::invalid_argument("lambda_corrected: n must be >= 1");
  GroupKinds kinds = distinct_kinds(weights, ranks);
  const std::size_t nk = kinds.dof.size();

  WeightedMixture mix;
  mix.dof = kinds.dof;
  mix.mass = kinds.mass;
  mix.scale.resize(nk);
  for (std::size_t j = 0; j < nk; ++j) mix.scale[j] = 1.0 / kinds.weight[j];

  Eigen::VectorXd lam(m);
  lam[0] = mix.quantile(1.0 - q / m);
  double sumsq = 0.0;  // ||lambda^S||^2 over accepted entries
  for (int i = 1; i < m; ++i) {
    sumsq += lam[i - 1] * lam[i - 1];
    const int disc = i;  // count of entries before this one
    bool flatten = false;
    for (std::size_t j = 0; j < nk && !flatten; ++j) {
      double denom = static_cast<double>(n) - static_cast<double>(kinds.dof[j]) * disc - 1.0;
      if (denom <= 0.0) {
        flatten = true;
        break;
      }
      double s2 = (static_cast<double>(n) - kinds.dof[j] * disc) / n +
                  kinds.weight[j] * kinds.weight[j] * sumsq / denom;
      mix.scale[j] = std::sqrt(s2) / kinds.weight[j];
    }
    double cand = flatten ? 0.0 : mix.quantile(1.0 - q * (i + 1) / m);
    if (!flatten && cand <= lam[i - 1]) {
      lam[i] = cand;
    } else {
      lam.tail(m - i).setConstant(lam[i - 1]);
      break;
    }
  }
  return LambdaSequence(std::move(lam), LambdaKind::corrected);
}

}  // namespace gslope
