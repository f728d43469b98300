#include "gslope/gwas.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "gslope/lambda.hpp"
#include "gslope/special_functions.hpp"

namespace gslope {

GenotypeMatrix::GenotypeMatrix(Eigen::MatrixXi v, std::vector<std::string> ids)
    : values(std::move(v)), snp_ids(std::move(ids)) {
  if (values.rows() < 2) throw std::invalid_argument("GenotypeMatrix: need n >= 2");
  if (static_cast<Eigen::Index>(snp_ids.size()) != values.cols())
    throw std::invalid_argument("GenotypeMatrix: id count must equal SNP count");
  for (Eigen::Index j = 0; j < values.cols(); ++j)
    for (Eigen::Index i = 0; i < values.rows(); ++i)
      if (values(i, j) < 0 || values(i, j) > 2)
        throw std::invalid_argument("GenotypeMatrix: entries must be 0, 1 or 2");
}

namespace {

// Center and normalize a raw dummy column; returns false for constant input.
bool standardize(Eigen::VectorXd& col) {
  col.array() -= col.mean();
  double nrm = col.norm();
  if (nrm <= 1e-12 * std::sqrt(static_cast<double>(col.size()))) return false;
  col /= nrm;
  return true;
}

}  // namespace

DummyEncoding dummy_encode(const GenotypeMatrix& g) {
  const int n = g.n(), s = g.s();
  DummyEncoding enc;
  enc.additive = Eigen::MatrixXd::Zero(n, s);
  enc.dominance = Eigen::MatrixXd::Zero(n, s);
  enc.additive_ok.assign(static_cast<std::size_t>(s), 0);
  enc.dominance_ok.assign(static_cast<std::size_t>(s), 0);
  for (int j = 0; j < s; ++j) {
    Eigen::VectorXd add(n), dom(n);
    for (int i = 0; i < n; ++i) {
      int v = g.values(i, j);
      add[i] = static_cast<double>(v);
      dom[i] = v == 1 ? 1.0 : 0.0;
    }
    if (standardize(add)) {
      enc.additive.col(j) = add;
      enc.additive_ok[static_cast<std::size_t>(j)] = 1;
    }
    if (standardize(dom)) {
      enc.dominance.col(j) = dom;
      enc.dominance_ok[static_cast<std::size_t>(j)] = 1;
    }
  }
  return enc;
}

Eigen::VectorXd anova_pvalues(const GenotypeMatrix& g, const Eigen::VectorXd& y) {
  const int n = g.n(), s = g.s();
  if (y.size() != n) throw std::invalid_argument("anova_pvalues: y length must equal n");
  const Eigen::VectorXd yc = y.array() - y.mean();  // grand mean 0
  const double sst = yc.squaredNorm();
  // a numerically constant response carries no class information
  if (sst <= 1e-24 * std::max(1.0, y.squaredNorm())) return Eigen::VectorXd::Ones(s);

  Eigen::VectorXd pv(s);
  for (int j = 0; j < s; ++j) {
    double sum[3] = {0, 0, 0}, sumsq[3] = {0, 0, 0};
    int cnt[3] = {0, 0, 0};
    for (int i = 0; i < n; ++i) {
      int c = g.values(i, j);
      sum[c] += yc[i];
      sumsq[c] += yc[i] * yc[i];
      ++cnt[c];
    }
    int classes = (cnt[0] > 0) + (cnt[1] > 0) + (cnt[2] > 0);
    if (classes < 2) {
      pv[j] = 1.0;
      continue;
    }
    double ssb = 0.0, ssw = 0.0;
    for (int c = 0; c < 3; ++c) {
      if (cnt[c] == 0) continue;
      double mean_c = sum[c] / cnt[c];
      ssb += cnt[c] * mean_c * mean_c;
      ssw += std::max(sumsq[c] - cnt[c] * mean_c * mean_c, 0.0);
    }
    if (ssw <= 0.0) {
      pv[j] = ssb > 1e-12 * sst ? 0.0 : 1.0;
      continue;
    }
    int df_b = classes - 1, df_w = n - classes;
    double F = (ssb / df_b) / (ssw / df_w);
    pv[j] = f_survival(df_b, df_w, F);
  }
  return pv;
}

ClumpResult clump(const Eigen::VectorXd& pvals,
                  const std::function<double(int, int)>& corr, double pi, double r) {
  if (!(pi > 0.0) || !(pi <= 1.0)) throw std::invalid_argument("clump: need 0 < pi <= 1");
  if (!(r > 0.0) || !(r < 1.0)) throw std::invalid_argument("clump: need 0 < r < 1");

  std::vector<int> B;
  for (Eigen::Index j = 0; j < pvals.size(); ++j)
    if (pvals[j] < pi) B.push_back(static_cast<int>(j));

  ClumpResult out;
  while (!B.empty()) {
    int rep = B[0];
    for (int j : B)
      if (pvals[j] < pvals[rep]) rep = j;  // ties keep the lowest index
    std::vector<int> cluster, rest;
    for (int j : B) {
      if (std::abs(corr(rep, j)) >= r) {
        cluster.push_back(j);
      } else {
        rest.push_back(j);
      }
    }
    out.representatives.push_back(rep);
    out.clusters[rep] = std::move(cluster);
    B = std::move(rest);
  }
  return out;
}

GeneGslopeReport gene_gslope(const GenotypeMatrix& g, const Eigen::VectorXd& y,
                             double pi, double r, double q, const SolveOptions& opts) {
  if (!(q > 0.0) || !(q < 1.0)) throw std::invalid_argument("gene_gslope: need 0 < q < 1");
  const int n = g.n(), s = g.s();
  if (y.size() != n) throw std::invalid_argument("gene_gslope: y length must equal n");

  GeneGslopeReport report;
  DummyEncoding enc = dummy_encode(g);
  for (int j = 0; j < s; ++j)
    if (!enc.additive_ok[static_cast<std::size_t>(j)])
      report.warnings.push_back("excluded monomorphic SNP " + g.snp_ids[static_cast<std::size_t>(j)]);

  Eigen::VectorXd pv = anova_pvalues(g, y);
  for (int j = 0; j < s; ++j)
    if (pv[j] < pi) report.screened.push_back(j);

  auto corr = [&enc](int a, int b) {
    if (!enc.additive_ok[static_cast<std::size_t>(a)] ||
        !enc.additive_ok[static_cast<std::size_t>(b)])
      return a == b ? 1.0 : 0.0;
    return enc.additive.col(a).dot(enc.additive.col(b));
  };
  report.clumps = clump(pv, corr, pi, r);
  const auto& reps = report.clumps.representatives;
  const int M = static_cast<int>(reps.size());
  if (M == 0) return report;  // empty screen: empty report by design

  // Assemble one {additive, dominance} group per representative.
  std::vector<std::vector<int>> groups;
  int total_cols = 0;
  for (int rep : reps)
    total_cols += 1 + (enc.dominance_ok[static_cast<std::size_t>(rep)] ? 1 : 0);
  Eigen::MatrixXd Xg(n, total_cols);
  int at = 0;
  for (int rep : reps) {
    std::vector<int> grp;
    Xg.col(at) = enc.additive.col(rep);
    grp.push_back(at++);
    if (enc.dominance_ok[static_cast<std::size_t>(rep)]) {
      Xg.col(at) = enc.dominance.col(rep);
      grp.push_back(at++);
    }
    groups.push_back(std::move(grp));
  }
  GroupedDesign design = build_grouped_design(
      Xg, GroupPartition(std::move(groups),
                         Eigen::VectorXd::Ones(static_cast<Eigen::Index>(M))));
  design.partition.weights = make_weights(WeightRule::sqrt_size, design.ranks);

  // Corrected sequence sized for all s initial SNPs as nominal rank-2
  // groups, then truncated to the representative count.
  LambdaSequence full = lambda_corrected(
      q, Eigen::VectorXd::Constant(s, std::sqrt(2.0)), std::vector<int>(s, 2), s, n);
  report.lambda = LambdaSequence(full.values.head(M), LambdaKind::corrected);

  SigmaEstimationResult se = solve_with_sigma_estimation(design, report.lambda, y, opts);
  report.sigma_hat = se.sigma_hat;
  report.converged = se.converged && se.result.converged;
  report.effects = se.result.effects;

  std::set<int> snps;
  for (int gi : se.result.selected) {
    int rep = reps[static_cast<std::size_t>(gi)];
    report.selected_representatives.push_back(rep);
    const auto& members = report.clumps.clusters.at(rep);
    snps.insert(members.begin(), members.end());
  }
  report.selected_snps.assign(snps.begin(), snps.end());
  return report;
}

}  // namespace gslope
