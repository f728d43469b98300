#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "gslope/groups.hpp"
#include "gslope/rng.hpp"
#include "gslope/sorted_l1.hpp"

namespace gslope {

enum class DesignKind { identity, orthogonal, gaussian };

struct GroupSizeSpec {
  enum class Kind { fixed, list, binomial } kind = Kind::fixed;
  int fixed_size = 1;
  std::vector<int> sizes;  // list mode, length m
  int trials = 0;          // binomial mode: size = 1 + Binomial(trials, prob)
  double prob = 0.0;
};

struct SimConfig {
  int m = 0;
  int n = 0;
  GroupSizeSpec size_spec;
  DesignKind design = DesignKind::identity;
  double q = 0.1;
  int k = 0;
  WeightRule weights_rule = WeightRule::sqrt_size;
  LambdaKind lambda_kind = LambdaKind::max;
  int replications = 1;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct SimulationReport {
  double gfdr_hat = 0.0;
  double power_hat = 0.0;
  double se_gfdr = 0.0;
  double se_power = 0.0;
  double nominal_bound = 0.0;  // q (m-k)/m
  int failures = 0;
  std::string first_error;
  std::vector<double> fdp;          // per successful replication, in rep order
  std::vector<double> power_share;  // TPg/k per successful replication
  SimConfig config;
};

// B(m, l) = sqrt(4 ln m / (1 - m^{-2/l}) - l); domain error when the
// expression under the root is nonpositive.
double signal_strength(int m, int l);

// 4 ln m / (1 - m^{-2/l}), an upper bound for E[max of m iid chi^2_l].
double max_chi_sq_bound(int m, int l);

// Group sizes for a config; binomial mode consumes draws from rng.
std::vector<int> resolve_group_sizes(const SimConfig& config, Philox& rng);

// Design matrix per config: identity (n >= p), block-orthonormal columns from
// a QR of a Gaussian matrix (n >= p), or iid N(0, 1/n) with columns centered
// and scaled to unit norm. Weights follow config.weights_rule on the ranks.
GroupedDesign gen_design(const SimConfig& config, const std::vector<int>& sizes,
                         Philox& rng);
GroupedDesign gen_design(const SimConfig& config, Philox& rng);

// Plants k uniformly chosen relevant groups, coefficients iid U[0.1, 1.1]
// rescaled so group effects equal a sqrt(l_i) with
// a = sum_i B(m, l_i) / sum_i sqrt(l_i) over all m groups.
Eigen::VectorXd gen_signal(const GroupedDesign& design, int k, Philox& rng);

// Monte-Carlo gFDR/power experiment; deterministic given config.seed for any
// thread count (per-replication substreams, sequential reduction).
SimulationReport run_experiment(const SimConfig& config);

}  // namespace gslope
