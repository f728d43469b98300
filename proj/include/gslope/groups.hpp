#pragma once

#include <Eigen/Dense>
#include <memory>
#include <mutex>
#include <vector>

#include "gslope/sorted_l1.hpp"

namespace gslope {

// Disjoint cover of variables 0..p-1 by m nonempty groups, with positive
// per-group weights.
struct GroupPartition {
  std::vector<std::vector<int>> groups;
  Eigen::VectorXd weights;

  GroupPartition(std::vector<std::vector<int>> groups_in, Eigen::VectorXd weights_in);

  int num_groups() const { return static_cast<int>(groups.size()); }
  int num_variables() const { return p_; }

 private:
  int p_ = 0;
};

enum class WeightRule { one, sqrt_size, size };

Eigen::VectorXd make_weights(WeightRule rule, const std::vector<int>& ranks);

// Per-group factorization X_{I_i} = U_i R_i with orthonormal U_i; Xtilde is
// the column concatenation of the U_i. Immutable after construction.
struct GroupedDesign {
  GroupedDesign(Eigen::MatrixXd X_in, GroupPartition partition_in)
      : X(std::move(X_in)), partition(std::move(partition_in)) {}

  Eigen::MatrixXd X;
  GroupPartition partition;
  std::vector<int> ranks;                    // l_i
  std::vector<Eigen::MatrixXd> R_blocks;     // l_i x |I_i|
  std::vector<Eigen::MatrixXd> Rpinv_blocks; // |I_i| x l_i, minimum-norm right inverse
  Eigen::MatrixXd Xtilde;                    // n x ptilde
  std::vector<int> offsets;                  // size m+1; block i spans [offsets[i], offsets[i+1])

  int n() const { return static_cast<int>(X.rows()); }
  int p() const { return static_cast<int>(X.cols()); }
  int num_groups() const { return partition.num_groups(); }
  int ptilde() const { return static_cast<int>(Xtilde.cols()); }

  Eigen::Block<const Eigen::MatrixXd> U_block(int i) const {
    return Xtilde.block(0, offsets[static_cast<std::size_t>(i)], Xtilde.rows(),
                        ranks[static_cast<std::size_t>(i)]);
  }

  // max |Xtilde' Xtilde - I|; zero iff the groups are mutually orthogonal.
  // Computed on first use and cached (copies share the cache).
  double group_orthogonality_defect() const;

 private:
  struct OrthoCache {
    std::once_flag flag;
    double defect = 0.0;
  };
  mutable std::shared_ptr<OrthoCache> ortho_cache_ = std::make_shared<OrthoCache>();
};

// Rank-revealing per-group factorization (thin SVD, singular values kept
// while > 1e-10 * sigma_max). A group whose submatrix is all zero is an error.
GroupedDesign build_grouped_design(const Eigen::MatrixXd& X, GroupPartition partition);

// Entry i = ||X_{I_i} b_{I_i}||_2, computed through the R_i blocks.
Eigen::VectorXd group_effects(const GroupedDesign& design, const Eigen::VectorXd& b);

// J_lambda(W * group_effects(b)).
double grouped_norm(const LambdaSequence& lambda, const GroupedDesign& design,
                    const Eigen::VectorXd& b);

// Block norms of a vector split into contiguous blocks of the given sizes.
Eigen::VectorXd block_norms(const Eigen::VectorXd& v, const std::vector<int>& sizes);

// Prox of the grouped sorted-l1 norm in unit-weight standardized coordinates:
// block i is scaled to the magnitude prox_sorted_l1 assigns its norm.
Eigen::VectorXd prox_grouped(const LambdaSequence& lambda, const std::vector<int>& sizes,
                             const Eigen::VectorXd& y);

}  // namespace gslope
