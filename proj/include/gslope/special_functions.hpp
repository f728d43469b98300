#pragma once

#include <vector>

namespace gslope {

// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double reg_lower_gamma(double a, double x);

// Regularized incomplete beta I_x(a, b), a, b > 0, x in [0, 1].
double reg_incomplete_beta(double a, double b, double x);

// CDF of the chi distribution with l degrees of freedom (sqrt of chi-square).
double chi_cdf(int l, double x);
double chi_pdf(int l, double x);

// Inverse chi CDF. p outside (0, 1) is a domain error; p is capped at
// 1 - 1e-15 before inversion.
double chi_quantile(int l, double p);

// Equally weighted mixture of scaled chi distributions; component j is
// scale[j] times a chi variable with dof[j] degrees of freedom.
struct ChiMixture {
  std::vector<int> dof;
  std::vector<double> scale;

  ChiMixture(std::vector<int> dof_in, std::vector<double> scale_in);
};

double mixture_cdf(const ChiMixture& mix, double x);
double mixture_quantile(const ChiMixture& mix, double p);

// Survival function P(F > x) of the F(d1, d2) distribution; x <= 0 gives 1.
double f_survival(double d1, double d2, double x);

}  // namespace gslope
