#include "gslope/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gslope {

namespace {

constexpr int kMaxTerms = 2000;

// Series expansion of P(a, x), effective for x < a + 1.
double gamma_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < kMaxTerms; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-16) {
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
  }
  throw std::runtime_error("reg_lower_gamma: series did not converge");
}

// Modified Lentz continued fraction for Q(a, x), effective for x >= a + 1.
double gamma_cf(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxTerms; ++i) {
    double an = -static_cast<double>(i) * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) {
      return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
  }
  throw std::runtime_error("reg_lower_gamma: continued fraction did not converge");
}

double beta_cf(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  double qab = a + b;
  double qap = a + 1.0;
  double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxTerms; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) return h;
  }
  throw std::runtime_error("reg_incomplete_beta: continued fraction did not converge");
}

double clamp_prob(double p) { return std::min(std::max(p, 1e-15), 1.0 - 1e-15); }

// Safeguarded Newton on cdf(x) - p over a verified bracket [lo, hi].
template <class Cdf, class Pdf>
double invert_cdf(const Cdf& cdf, const Pdf& pdf, double p, double lo, double hi,
                  const char* what) {
  double x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    double f = cdf(x) - p;
    if (std::abs(f) <= 1e-13) return x;
    if (f > 0.0) {
      hi = x;
    } else {
      lo = x;
    }
    double df = pdf(x);
    double xn = df > 0.0 ? x - f / df : x;
    if (xn > lo && xn < hi) {
      x = xn;
    } else {
      x = 0.5 * (lo + hi);
    }
    if (hi - lo <= 1e-15 * std::max(1.0, hi)) {
      if (std::abs(cdf(x) - p) <= 1e-10) return x;
      break;
    }
  }
  throw std::runtime_error(std::string(what) + ": quantile iteration cap reached");
}

}  // namespace

double reg_lower_gamma(double a, double x) {
  if (!(a > 0.0)) throw std::domain_error("reg_lower_gamma: a must be positive");
  if (!(x >= 0.0)) throw std::domain_error("reg_lower_gamma: x must be nonnegative");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_series(a, x);
  return 1.0 - gamma_cf(a, x);
}

double reg_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::domain_error("reg_incomplete_beta: a and b must be positive");
  if (!(x >= 0.0) || !(x <= 1.0))
    throw std::domain_error("reg_incomplete_beta: x must be in [0, 1]");
  if (x == 0.0 || x == 1.0) return x;
  double bt = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                       a * std::log(x) + b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * beta_cf(a, b, x) / a;
  return 1.0 - bt * beta_cf(b, a, 1.0 - x) / b;
}

double chi_cdf(int l, double x) {
  if (l < 1) throw std::domain_error("chi_cdf: dof must be >= 1");
  if (x <= 0.0) return 0.0;
  if (l == 1) return std::erf(x * 0.7071067811865475244);
  if (l == 2) return -std::expm1(-0.5 * x * x);
  return reg_lower_gamma(0.5 * l, 0.5 * x * x);
}

double chi_pdf(int l, double x) {
  if (l < 1) throw std::domain_error("chi_pdf: dof must be >= 1");
  if (x <= 0.0) return 0.0;
  double lg = (l - 1) * std::log(x) - 0.5 * x * x -
              (0.5 * l - 1.0) * 0.6931471805599453094 - std::lgamma(0.5 * l);
  return std::exp(lg);
}

double chi_quantile(int l, double p) {
  if (l < 1) throw std::domain_error("chi_quantile: dof must be >= 1");
  if (!(p > 0.0) || !(p < 1.0)) throw std::domain_error("chi_quantile: p must be in (0, 1)");
  p = clamp_prob(p);
  if (l == 2) return std::sqrt(-2.0 * std::log1p(-p));
  double hi = std::sqrt(static_cast<double>(l)) + 1.0;
  while (chi_cdf(l, hi) < p) hi *= 2.0;
  return invert_cdf([l](double x) { return chi_cdf(l, x); },
                    [l](double x) { return chi_pdf(l, x); }, p, 0.0, hi,
                    "chi_quantile");
}

ChiMixture::ChiMixture(std::vector<int> dof_in, std::vector<double> scale_in)
    : dof(std::move(dof_in)), scale(std::move(scale_in)) {
  if (dof.empty() || dof.size() != scale.size())
    throw std::invalid_argument("ChiMixture: dof and scale must be nonempty, equal length");
  for (int l : dof)
    if (l < 1) throw std::invalid_argument("ChiMixture: dof entries must be >= 1");
  for (double s : scale)
    if (!(s > 0.0)) throw std::invalid_argument("ChiMixture: scale entries must be positive");
}

double mixture_cdf(const ChiMixture& mix, double x) {
  if (x <= 0.0) return 0.0;
  double acc = 0.0;
  for (std::size_t j = 0; j < mix.dof.size(); ++j)
    acc += chi_cdf(mix.dof[j], x / mix.scale[j]);
  return acc / static_cast<double>(mix.dof.size());
}

double mixture_quantile(const ChiMixture& mix, double p) {
  if (!(p > 0.0) || !(p < 1.0))
    throw std::domain_error("mixture_quantile: p must be in (0, 1)");
  p = clamp_prob(p);
  // At max_j scale_j * q_j(p') every component CDF is >= p' > p, so this
  // brackets the root from above.
  double pp = clamp_prob(p + 0.5 * (1.0 - p));
  double hi = 0.0;
  for (std::size_t j = 0; j < mix.dof.size(); ++j)
    hi = std::max(hi, mix.scale[j] * chi_quantile(mix.dof[j], pp));
  while (mixture_cdf(mix, hi) < p) hi *= 2.0;
  auto pdf = [&mix](double x) {
    double acc = 0.0;
    for (std::size_t j = 0; j < mix.dof.size(); ++j)
      acc += chi_pdf(mix.dof[j], x / mix.scale[j]) / mix.scale[j];
    return acc / static_cast<double>(mix.dof.size());
  };
  return invert_cdf([&mix](double x) { return mixture_cdf(mix, x); }, pdf, p, 0.0,
                    hi, "mixture_quantile");
}

double f_survival(double d1, double d2, double x) {
  if (!(d1 > 0.0) || !(d2 > 0.0))
    throw std::domain_error("f_survival: degrees of freedom must be positive");
  if (x <= 0.0) return 1.0;
  return reg_incomplete_beta(0.5 * d2, 0.5 * d1, d2 / (d2 + d1 * x));
}

}  // namespace gslope
