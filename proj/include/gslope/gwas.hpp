#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "gslope/sigma_estimation.hpp"
#include "gslope/solver.hpp"
#include "gslope/sorted_l1.hpp"

namespace gslope {

// Minor-allele counts, entries in {0, 1, 2}.
struct GenotypeMatrix {
  Eigen::MatrixXi values;  // n x s
  std::vector<std::string> snp_ids;

  GenotypeMatrix(Eigen::MatrixXi v, std::vector<std::string> ids);

  int n() const { return static_cast<int>(values.rows()); }
  int s() const { return static_cast<int>(values.cols()); }
};

struct DummyEncoding {
  Eigen::MatrixXd additive;   // centered, unit-norm allele counts
  Eigen::MatrixXd dominance;  // centered, unit-norm heterozygote indicators
  std::vector<char> additive_ok;   // false for constant (monomorphic) columns
  std::vector<char> dominance_ok;  // false when no or all samples are heterozygous
};

// Table coding aa -> (2, 0), aA -> (1, 1), AA -> (0, 0), then centering and
// scaling to unit norm; constant columns are flagged and left zero.
DummyEncoding dummy_encode(const GenotypeMatrix& g);

// One-way ANOVA of y over the genotype classes present per SNP. Single class
// gives p = 1; zero within-class variance with distinct means gives p = 0.
Eigen::VectorXd anova_pvalues(const GenotypeMatrix& g, const Eigen::VectorXd& y);

struct ClumpResult {
  std::vector<int> representatives;         // in formation order (p nondecreasing)
  std::map<int, std::vector<int>> clusters; // representative -> members (ascending)
};

// Greedy clumping of the screened set {p < pi}: repeatedly pick the smallest
// p-value (ties: lowest index) and absorb every screened SNP with
// |correlation| >= r.
ClumpResult clump(const Eigen::VectorXd& pvals,
                  const std::function<double(int, int)>& corr, double pi, double r);

struct GeneGslopeReport {
  ClumpResult clumps;
  std::vector<int> screened;                 // SNPs with p < pi, ascending
  std::vector<int> selected_representatives; // subset of clumps.representatives
  std::vector<int> selected_snps;            // selected clusters expanded, ascending
  Eigen::VectorXd effects;                   // per representative group
  double sigma_hat = 0.0;
  LambdaSequence lambda;                     // truncated sequence passed to the solver
  bool converged = true;
  std::vector<std::string> warnings;
};

// Screen -> clump -> per-representative {additive, dominance} groups (ranks
// from the factorization, weights sqrt(rank)) -> sigma-estimating gSLOPE with
// the corrected sequence built for all s initial SNPs (nominal rank-2 groups)
// and truncated to the representative count.
GeneGslopeReport gene_gslope(const GenotypeMatrix& g, const Eigen::VectorXd& y,
                             double pi, double r, double q,
                             const SolveOptions& opts = {});

}  // namespace gslope
