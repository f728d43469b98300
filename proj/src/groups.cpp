#include "gslope/groups.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gslope {

GroupPartition::GroupPartition(std::vector<std::vector<int>> groups_in,
                               Eigen::VectorXd weights_in)
    : groups(std::move(groups_in)), weights(std::move(weights_in)) {
  if (groups.empty()) throw std::invalid_argument("GroupPartition: no groups");
  if (weights.size() != static_cast<Eigen::Index>(groups.size()))
    throw std::invalid_argument("GroupPartition: weights length must equal group count");
  for (Eigen::Index i = 0; i < weights.size(); ++i)
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i]))
      throw std::invalid_argument("GroupPartition: weights must be positive and finite");

  std::size_t total = 0;
  for (const auto& g : groups) {
    if (g.empty()) throw std::invalid_argument("GroupPartition: empty group");
    total += g.size();
  }
  std::vector<char> seen(total, 0);
  for (const auto& g : groups) {
    for (int idx : g) {
      if (idx < 0 || static_cast<std::size_t>(idx) >= total)
        throw std::invalid_argument("GroupPartition: index outside 0..p-1");
      if (seen[static_cast<std::size_t>(idx)])
        throw std::invalid_argument("GroupPartition: groups are not disjoint");
      seen[static_cast<std::size_t>(idx)] = 1;
    }
  }
  p_ = static_cast<int>(total);
}

Eigen::VectorXd make_weights(WeightRule rule, const std::vector<int>& ranks) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(ranks.size()));
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    if (ranks[i] < 1) throw std::invalid_argument("make_weights: ranks must be >= 1");
    switch (rule) {
      case WeightRule::one: w[static_cast<Eigen::Index>(i)] = 1.0; break;
      case WeightRule::sqrt_size: w[static_cast<Eigen::Index>(i)] = std::sqrt(ranks[i]); break;
      case WeightRule::size: w[static_cast<Eigen::Index>(i)] = ranks[i]; break;
    }
  }
  return w;
}

GroupedDesign build_grouped_design(const Eigen::MatrixXd& X, GroupPartition partition) {
  if (partition.num_variables() != X.cols())
    throw std::invalid_argument("build_grouped_design: partition does not cover the columns of X");

  const int m = partition.num_groups();
  GroupedDesign design(X, std::move(partition));
  design.ranks.reserve(static_cast<std::size_t>(m));
  design.R_blocks.reserve(static_cast<std::size_t>(m));
  design.Rpinv_blocks.reserve(static_cast<std::size_t>(m));
  design.offsets.reserve(static_cast<std::size_t>(m) + 1);

  std::vector<Eigen::MatrixXd> U_blocks;
  U_blocks.reserve(static_cast<std::size_t>(m));
  int ptilde = 0;
  design.offsets.push_back(0);
  for (int i = 0; i < m; ++i) {
    const auto& idx = design.partition.groups[static_cast<std::size_t>(i)];
    Eigen::MatrixXd B(X.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) B.col(static_cast<Eigen::Index>(c)) = X.col(idx[c]);

    Eigen::BDCSVD<Eigen::MatrixXd> svd(B, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    if (sv.size() == 0 || !(sv[0] > 0.0))
      throw std::invalid_argument("build_grouped_design: zero-rank group " + std::to_string(i));
    int rank = 0;
    for (Eigen::Index j = 0; j < sv.size(); ++j)
      if (sv[j] > 1e-10 * sv[0]) ++rank;

    U_blocks.push_back(svd.matrixU().leftCols(rank));
    design.R_blocks.push_back(sv.head(rank).asDiagonal() *
                              svd.matrixV().leftCols(rank).transpose());
    design.Rpinv_blocks.push_back(svd.matrixV().leftCols(rank) *
                                  sv.head(rank).cwiseInverse().asDiagonal());
    design.ranks.push_back(rank);
    ptilde += rank;
    design.offsets.push_back(ptilde);
  }

  design.Xtilde.resize(X.rows(), ptilde);
  for (int i = 0; i < m; ++i)
    design.Xtilde.middleCols(design.offsets[static_cast<std::size_t>(i)],
                             design.ranks[static_cast<std::size_t>(i)]) =
        U_blocks[static_cast<std::size_t>(i)];
  return design;
}

double GroupedDesign::group_orthogonality_defect() const {
  std::call_once(ortho_cache_->flag, [this] {
    Eigen::MatrixXd G = Xtilde.transpose() * Xtilde;
    G.diagonal().array() -= 1.0;
    ortho_cache_->defect = G.cwiseAbs().maxCoeff();
  });
  return ortho_cache_->defect;
}

Eigen::VectorXd group_effects(const GroupedDesign& design, const Eigen::VectorXd& b) {
  if (b.size() != design.p())
    throw std::invalid_argument("group_effects: vector length must equal p");
  const int m = design.num_groups();
  Eigen::VectorXd e(m);
  Eigen::VectorXd sub;
  for (int i = 0; i < m; ++i) {
    const auto& idx = design.partition.groups[static_cast<std::size_t>(i)];
    sub.resize(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) sub[static_cast<Eigen::Index>(c)] = b[idx[c]];
    e[i] = (design.R_blocks[static_cast<std::size_t>(i)] * sub).norm();
  }
  return e;
}

double grouped_norm(const LambdaSequence& lambda, const GroupedDesign& design,
                    const Eigen::VectorXd& b) {
  return sorted_l1_norm(lambda,
                        design.partition.weights.cwiseProduct(group_effects(design, b)));
}

Eigen::VectorXd block_norms(const Eigen::VectorXd& v, const std::vector<int>& sizes) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(sizes.size()));
  Eigen::Index at = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = v.segment(at, sizes[i]).norm();
    at += sizes[i];
  }
  if (at != v.size())
    throw std::invalid_argument("block_norms: sizes do not sum to the vector length");
  return out;
}

Eigen::VectorXd prox_grouped(const LambdaSequence& lambda, const std::vector<int>& sizes,
                             const Eigen::VectorXd& y) {
  if (lambda.size() != static_cast<Eigen::Index>(sizes.size()))
    throw std::invalid_argument("prox_grouped: lambda length must equal group count");
  Eigen::VectorXd g = block_norms(y, sizes);
  Eigen::VectorXd c = prox_sorted_l1(lambda, g);
  Eigen::VectorXd out(y.size());
  Eigen::Index at = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    Eigen::Index ei = static_cast<Eigen::Index>(i);
    if (g[ei] > 0.0) {
      out.segment(at, sizes[i]) = (c[ei] / g[ei]) * y.segment(at, sizes[i]);
    } else {
      out.segment(at, sizes[i]).setZero();
    }
    at += sizes[i];
  }
  return out;
}

}  // namespace gslope
