// Acceptance suite: each criterion prints one [PASS]/[FAIL] line.
// Run with no arguments for all criteria, or with a number (1..9) for one.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "gslope/groups.hpp"
#include "gslope/gwas.hpp"
#include "gslope/lambda.hpp"
#include "gslope/sigma_estimation.hpp"
#include "gslope/simulation.hpp"
#include "gslope/solver.hpp"
#include "gslope/sorted_l1.hpp"
#include "gslope/special_functions.hpp"
#include "test_helpers.hpp"

using namespace gslope;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

std::vector<std::vector<int>> contiguous(const std::vector<int>& sizes) {
  std::vector<std::vector<int>> groups;
  int at = 0;
  for (int s : sizes) {
    std::vector<int> g(static_cast<std::size_t>(s));
    std::iota(g.begin(), g.end(), at);
    at += s;
    groups.push_back(std::move(g));
  }
  return groups;
}

GroupedDesign block_orthogonal_design(std::mt19937_64& rng, int n,
                                      const std::vector<int>& sizes) {
  int p = std::accumulate(sizes.begin(), sizes.end(), 0);
  std::normal_distribution<double> nd(0.0, 1.0);
  MatrixXd G(n, p);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < n; ++i) G(i, j) = nd(rng);
  Eigen::HouseholderQR<MatrixXd> qr(G);
  MatrixXd Q = qr.householderQ() * MatrixXd::Identity(n, p);
  MatrixXd X(n, p);
  int at = 0;
  for (int s : sizes) {
    MatrixXd T(s, s);
    do {
      for (int a = 0; a < s; ++a)
        for (int b = 0; b < s; ++b) T(a, b) = nd(rng);
    } while (std::abs(T.determinant()) < 1e-3);
    X.middleCols(at, s) = Q.middleCols(at, s) * T;
    at += s;
  }
  std::uniform_real_distribution<double> uw(0.5, 2.5);
  auto m = static_cast<Eigen::Index>(sizes.size());
  VectorXd w(m);
  for (Eigen::Index i = 0; i < m; ++i) w[i] = uw(rng);
  return build_grouped_design(X, GroupPartition(contiguous(sizes), w));
}

// ---------------------------------------------------------------------------
// 1. identity design, equal groups: estimated group FDR under the nominal
//    bound q (m-k)/m + 2 SE in every (q, k) cell.
bool criterion1() {
  SimConfig base;
  base.m = 200;
  base.n = 1000;
  base.size_spec.kind = GroupSizeSpec::Kind::fixed;
  base.size_spec.fixed_size = 5;
  base.design = DesignKind::identity;
  base.weights_rule = WeightRule::sqrt_size;
  base.lambda_kind = LambdaKind::max;
  base.replications = 300;
  base.seed = 9001;

  bool ok = true;
  for (double q : {0.05, 0.1, 0.2}) {
    for (int k : {0, 10, 50}) {
      SimConfig c = base;
      c.q = q;
      c.k = k;
      SimulationReport rep = run_experiment(c);
      double bound = rep.nominal_bound + 2.0 * rep.se_gfdr;
      bool cell = rep.failures == 0 && rep.gfdr_hat <= bound;
      std::printf("  q=%.2f k=%2d: gfdr=%.4f nominal=%.4f se=%.4f power=%.3f %s\n",
                  q, k, rep.gfdr_hat, rep.nominal_bound, rep.se_gfdr, rep.power_hat,
                  cell ? "ok" : "VIOLATED");
      std::fflush(stdout);
      ok = ok && cell;
    }
  }
  return ok;
}

// ---------------------------------------------------------------------------
// 2. mixed group sizes: the mixture-quantile sequence keeps the estimated
//    group FDR within 2 SE of nominal and never loses power against the
//    per-rank-max sequence on the same data.
bool criterion2() {
  std::vector<int> sizes;
  for (int l = 3; l <= 7; ++l)
    for (int i = 0; i < 40; ++i) sizes.push_back(l);

  SimConfig base;
  base.m = 200;
  base.n = 1000;
  base.size_spec.kind = GroupSizeSpec::Kind::list;
  base.size_spec.sizes = sizes;
  base.design = DesignKind::identity;
  base.weights_rule = WeightRule::sqrt_size;
  base.replications = 300;
  base.seed = 9402;

  bool ok = true;
  for (double q : {0.05, 0.1, 0.2}) {
    for (int k : {0, 10, 50}) {
      SimConfig cm = base;
      cm.q = q;
      cm.k = k;
      cm.lambda_kind = LambdaKind::mean;
      SimulationReport mean_rep = run_experiment(cm);
      SimConfig cx = cm;
      cx.lambda_kind = LambdaKind::max;
      SimulationReport max_rep = run_experiment(cx);

      double dev = std::abs(mean_rep.gfdr_hat - mean_rep.nominal_bound);
      bool fdr_ok = mean_rep.failures == 0 && dev <= 2.0 * mean_rep.se_gfdr;
      bool power_ok = mean_rep.power_hat >= max_rep.power_hat - 1e-12;
      std::printf(
          "  q=%.2f k=%2d: gfdr=%.4f nominal=%.4f se=%.4f power mean=%.3f max=%.3f %s\n",
          q, k, mean_rep.gfdr_hat, mean_rep.nominal_bound, mean_rep.se_gfdr,
          mean_rep.power_hat, max_rep.power_hat,
          (fdr_ok && power_ok) ? "ok" : "VIOLATED");
      std::fflush(stdout);
      ok = ok && fdr_ok && power_ok;
    }
  }
  return ok;
}

// ---------------------------------------------------------------------------
// 3. Gaussian design with estimated noise and the corrected sequence:
//    empirical control at q = 0.1 with the loose tolerance max(0.03, 2 SE).
bool criterion3() {
  SimConfig base;
  base.m = 200;
  base.n = 1000;
  base.size_spec.kind = GroupSizeSpec::Kind::binomial;
  base.size_spec.trials = 200;
  base.size_spec.prob = 0.04;
  base.design = DesignKind::gaussian;
  base.weights_rule = WeightRule::sqrt_size;
  base.lambda_kind = LambdaKind::corrected;
  base.q = 0.1;
  base.replications = 200;
  base.seed = 9003;

  bool ok = true;
  for (int k : {5, 20}) {
    SimConfig c = base;
    c.k = k;
    SimulationReport rep = run_experiment(c);
    double bound = 0.1 + std::max(0.03, 2.0 * rep.se_gfdr);
    bool cell = rep.gfdr_hat <= bound &&
                rep.failures <= base.replications / 10;
    std::printf("  k=%2d: gfdr=%.4f bound=%.4f se=%.4f power=%.3f failures=%d %s\n",
                k, rep.gfdr_hat, bound, rep.se_gfdr, rep.power_hat, rep.failures,
                cell ? "ok" : "VIOLATED");
    std::fflush(stdout);
    ok = ok && cell;
  }
  return ok;
}

// ---------------------------------------------------------------------------
// 4. prox of the sorted-l1 norm: dual certificates on 10^4 random instances
//    and a grid-search oracle in two dimensions.
bool criterion4() {
  std::mt19937_64 rng(9004);
  int bad_cert = 0;
  for (int t = 0; t < 10000; ++t) {
    int p = 1 + static_cast<int>(rng() % 8);
    LambdaSequence lam(testing::random_lambda(rng, p, 2.0));
    VectorXd y = testing::random_vector(rng, p, 3.0);
    VectorXd b = prox_sorted_l1(lam, y);
    VectorXd u = y - b;
    double J = sorted_l1_norm(lam, b);
    double gap = std::abs(u.dot(b) - J);
    if (gap > 1e-8 * (1.0 + J) || !in_dual_ball(lam, u, 1e-8)) ++bad_cert;
  }
  std::printf("  dual certificates: %d of 10000 violated\n", bad_cert);

  int bad_grid = 0;
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    LambdaSequence lam(testing::random_lambda(rng, 2, 1.5));
    VectorXd y = testing::random_vector(rng, 2, 1.5);
    VectorXd b = prox_sorted_l1(lam, y);
    auto g = testing::grid_prox2(y[0], y[1], lam.values[0], lam.values[1]);
    double d = std::max(std::abs(b[0] - g[0]), std::abs(b[1] - g[1]));
    worst = std::max(worst, d);
    if (d > 2e-4) ++bad_grid;
  }
  std::printf("  grid oracle: %d of 100 beyond 2e-4 (worst %.2e)\n", bad_grid, worst);
  return bad_cert == 0 && bad_grid == 0;
}

// ---------------------------------------------------------------------------
// 5. the general solver agrees with the closed orthogonal path on
//    block-orthogonal designs.
bool criterion5() {
  std::mt19937_64 rng(9005);
  int bad = 0;
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    std::vector<int> sizes;
    int m = 2 + static_cast<int>(rng() % 5);
    for (int i = 0; i < m; ++i) sizes.push_back(1 + static_cast<int>(rng() % 4));
    int n = 30 + static_cast<int>(rng() % 31);
    GroupedDesign d = block_orthogonal_design(rng, n, sizes);
    LambdaSequence lam(testing::random_lambda(rng, m, 3.0));
    VectorXd y = testing::random_vector(rng, n, 2.0);

    SolveOptions tight;
    tight.dual_gap_tol = 1e-10;
    tight.infeas_tol = 1e-10;
    SolveResult a = solve_gslope(d, lam, y, tight);
    SolveResult b = solve_orthogonal(d, lam, y, tight);
    double rel = (a.effects - b.effects).norm() / (1.0 + b.effects.norm());
    worst = std::max(worst, rel);
    if (!a.converged || !b.converged || rel > 1e-6) ++bad;
  }
  std::printf("  cross-path: %d of 100 beyond 1e-6 relative (worst %.2e)\n", bad, worst);
  return bad == 0;
}

// ---------------------------------------------------------------------------
// 6. diagonal problems: the support is the top-R set of d_i |y_i| and the
//    solution inherits the sign of y.
bool criterion6() {
  std::mt19937_64 rng(9006);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int bad = 0;
  for (int t = 0; t < 1000; ++t) {
    int p = 5 + static_cast<int>(rng() % 36);
    // separated products d_i * y_i so the top-R set is unambiguous
    std::vector<double> prod(static_cast<std::size_t>(p));
    for (int i = 0; i < p; ++i) prod[static_cast<std::size_t>(i)] = 0.3 + 0.45 * i + 0.1 * u(rng);
    std::shuffle(prod.begin(), prod.end(), rng);
    VectorXd d(p), y(p);
    for (int i = 0; i < p; ++i) {
      d[i] = 0.25 + 2.25 * u(rng);
      y[i] = prod[static_cast<std::size_t>(i)] / d[i];
    }
    VectorXd lamv(p);
    double high = 0.9 * (0.3 + 0.45 * (p - 1));
    for (int i = 0; i < p; ++i) lamv[i] = high * u(rng);
    std::sort(lamv.data(), lamv.data() + p, std::greater<double>());
    LambdaSequence lam(lamv);

    VectorXd b;
    try {
      b = solve_diagonal_slope(d, lam, y, 1e-10);
    } catch (const NonconvergenceError&) {
      ++bad;
      continue;
    }
    if (b.minCoeff() < -1e-8) {
      ++bad;
      continue;
    }
    std::vector<int> order(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int c) { return prod[static_cast<std::size_t>(a)] > prod[static_cast<std::size_t>(c)]; });
    int R = 0;
    for (int i = 0; i < p; ++i)
      if (b[i] != 0.0) ++R;
    bool match = true;
    for (int r = 0; r < R; ++r) match = match && b[order[static_cast<std::size_t>(r)]] != 0.0;
    for (int r = R; r < p; ++r) match = match && b[order[static_cast<std::size_t>(r)]] == 0.0;
    if (!match) ++bad;
  }
  std::printf("  diagonal support law: %d of 1000 violated\n", bad);
  return bad == 0;
}

// ---------------------------------------------------------------------------
// 7. distribution kernels: closed forms, quantile round trips, and the
//    defining identity of the mixture sequence.
bool criterion7() {
  bool ok = true;
  double worst_cdf = 0.0, worst_q = 0.0;
  for (int i = 1; i <= 600; ++i) {
    double x = 0.01 * i;
    worst_cdf = std::max(worst_cdf, std::abs(chi_cdf(1, x) - std::erf(x / std::sqrt(2.0))));
    worst_cdf = std::max(worst_cdf, std::abs(chi_cdf(2, x) - (1.0 - std::exp(-0.5 * x * x))));
  }
  for (int i = 1; i <= 99; ++i) {
    double p = 0.01 * i;
    double q1 = chi_quantile(1, p);
    double q2 = chi_quantile(2, p);
    worst_q = std::max(worst_q, std::abs(std::erf(q1 / std::sqrt(2.0)) - p));
    worst_q = std::max(worst_q, std::abs(q2 - std::sqrt(-2.0 * std::log1p(-p))));
    worst_q = std::max(worst_q, std::abs(chi_cdf(1, q1) - p));
    worst_q = std::max(worst_q, std::abs(chi_cdf(2, q2) - p));
  }
  std::printf("  closed forms: cdf worst %.2e, quantile worst %.2e\n", worst_cdf, worst_q);
  ok = ok && worst_cdf <= 1e-8 && worst_q <= 1e-8;

  std::mt19937_64 rng(9007);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_mix = 0.0;
  for (int t = 0; t < 200; ++t) {
    int comps = 1 + static_cast<int>(rng() % 5);
    std::vector<int> dof;
    std::vector<double> scale;
    for (int c = 0; c < comps; ++c) {
      dof.push_back(1 + static_cast<int>(rng() % 8));
      scale.push_back(0.3 + 2.7 * u(rng));
    }
    ChiMixture mix(dof, scale);
    double p = 0.01 + 0.98 * u(rng);
    double x = mixture_quantile(mix, p);
    worst_mix = std::max(worst_mix, std::abs(mixture_cdf(mix, x) - p));
  }
  std::printf("  mixture round trips: worst %.2e\n", worst_mix);
  ok = ok && worst_mix <= 1e-8;

  double worst_id = 0.0;
  for (int t = 0; t < 5; ++t) {
    int m = 3 + static_cast<int>(rng() % 28);
    VectorXd w(m);
    std::vector<int> ranks;
    for (int i = 0; i < m; ++i) {
      w[i] = 0.4 + 2.0 * u(rng);
      ranks.push_back(1 + static_cast<int>(rng() % 6));
    }
    double q = 0.02 + 0.28 * u(rng);
    LambdaSequence lam = lambda_mean(q, w, ranks, m);
    for (int r = 1; r <= m; ++r) {
      double total = 0.0;
      for (int j = 0; j < m; ++j) total += 1.0 - chi_cdf(ranks[static_cast<std::size_t>(j)], w[j] * lam[r - 1]);
      worst_id = std::max(worst_id, std::abs(total - q * r));
    }
  }
  std::printf("  mixture-sequence identity: worst %.2e\n", worst_id);
  return ok && worst_id <= 1e-6;
}

// ---------------------------------------------------------------------------
// 8. expected maximum of m iid chi-squared variables stays under
//    4 ln m / (1 - m^{-2/l}) with at least 3 SE to spare.
bool criterion8() {
  std::mt19937_64 rng(9008);
  bool ok = true;
  for (auto [m, l] : {std::pair<int, int>{100, 5}, {1000, 3}}) {
    std::chi_squared_distribution<double> chi(static_cast<double>(l));
    const int reps = 10000;
    double s1 = 0.0, s2 = 0.0;
    for (int t = 0; t < reps; ++t) {
      double mx = 0.0;
      for (int i = 0; i < m; ++i) mx = std::max(mx, chi(rng));
      s1 += mx;
      s2 += mx * mx;
    }
    double mean = s1 / reps;
    double se = std::sqrt((s2 / reps - mean * mean) / (reps - 1));
    double bound = max_chi_sq_bound(m, l);
    bool cell = mean + 3.0 * se <= bound;
    std::printf("  m=%4d l=%d: mean=%.3f + 3se=%.3f vs bound=%.3f %s\n", m, l, mean,
                3.0 * se, bound, cell ? "ok" : "VIOLATED");
    ok = ok && cell;
  }
  return ok;
}

// ---------------------------------------------------------------------------
// 9. genotype pipeline at desk scale: the causal cluster is recovered in at
//    least 90% of seeded runs, and null runs select anything at most
//    10% + 2 SE of the time.
bool criterion9() {
  const int n = 500, s = 201, reps = 50;
  const double gamma = 1.0;

  auto make_genotypes = [&](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> umaf(0.1, 0.5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXi v(n, s);
    std::vector<std::string> ids;
    for (int j = 0; j < s; ++j) {
      double maf = umaf(rng);
      for (int i = 0; i < n; ++i)
        v(i, j) = (u(rng) < maf ? 1 : 0) + (u(rng) < maf ? 1 : 0);
      ids.push_back("snp" + std::to_string(j));
    }
    return GenotypeMatrix(std::move(v), std::move(ids));
  };

  int recovered = 0;
  for (int rep = 0; rep < reps; ++rep) {
    std::mt19937_64 rng(81000 + static_cast<unsigned>(rep));
    GenotypeMatrix g = make_genotypes(rng);
    std::normal_distribution<double> nd(0.0, 1.0);
    int causal = static_cast<int>(rng() % s);
    VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = gamma * g.values(i, causal) + nd(rng);
    GeneGslopeReport out = gene_gslope(g, y, 0.05, 0.3, 0.1);
    bool hit = out.converged &&
               std::find(out.selected_snps.begin(), out.selected_snps.end(), causal) !=
                   out.selected_snps.end();
    if (hit) ++recovered;
  }
  std::printf("  causal recovery: %d of %d\n", recovered, reps);

  int any_selection = 0;
  for (int rep = 0; rep < reps; ++rep) {
    std::mt19937_64 rng(82000 + static_cast<unsigned>(rep));
    GenotypeMatrix g = make_genotypes(rng);
    std::normal_distribution<double> nd(0.0, 1.0);
    VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = nd(rng);
    GeneGslopeReport out = gene_gslope(g, y, 0.05, 0.3, 0.1);
    if (!out.converged || !out.selected_snps.empty()) ++any_selection;
  }
  double rate = static_cast<double>(any_selection) / reps;
  double se = std::sqrt(std::max(rate * (1.0 - rate), 1e-12) / reps);
  bool null_ok = rate <= 0.1 + 2.0 * se;
  std::printf("  null selection rate: %.3f (bound %.3f)\n", rate, 0.1 + 2.0 * se);
  return recovered >= 45 && null_ok;
}

}  // namespace

int main(int argc, char** argv) {
  using Fn = bool (*)();
  const Fn checks[] = {criterion1, criterion2, criterion3, criterion4, criterion5,
                       criterion6, criterion7, criterion8, criterion9};
  int lo = 1, hi = 9;
  if (argc > 1) {
    int which = std::atoi(argv[1]);
    if (which < 1 || which > 9) {
      std::fprintf(stderr, "usage: %s [1..9]\n", argv[0]);
      return 2;
    }
    lo = hi = which;
  }
  bool all = true;
  for (int i = lo; i <= hi; ++i) {
    bool pass = checks[i - 1]();
    std::printf("[%s] criterion %d\n", pass ? "PASS" : "FAIL", i);
    std::fflush(stdout);
    all = all && pass;
  }
  return all ? 0 : 1;
}
