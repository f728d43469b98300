#include "gslope/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "gslope/lambda.hpp"
#include "gslope/sigma_estimation.hpp"
#include "gslope/solver.hpp"

namespace gslope {

namespace {

constexpr std::uint64_t kSizesStream = 0;
constexpr std::uint64_t kDesignStream = 1;
constexpr std::uint64_t kRepStreamBase = 2;

void validate_config(const SimConfig& c) {
  if (c.m < 1) throw std::invalid_argument("sim config: m must be >= 1");
  if (c.n < 1) throw std::invalid_argument("sim config: n must be >= 1");
  if (!(c.q > 0.0) || !(c.q < 1.0)) throw std::invalid_argument("sim config: q must be in (0, 1)");
  if (c.k < 0 || c.k > c.m) throw std::invalid_argument("sim config: need 0 <= k <= m");
  if (c.replications < 1) throw std::invalid_argument("sim config: replications must be >= 1");
  if (c.threads < 1) throw std::invalid_argument("sim config: threads must be >= 1");
}

GroupPartition contiguous_partition(const std::vector<int>& sizes) {
  std::vector<std::vector<int>> groups;
  groups.reserve(sizes.size());
  int at = 0;
  for (int s : sizes) {
    std::vector<int> g(static_cast<std::size_t>(s));
    std::iota(g.begin(), g.end(), at);
    at += s;
    groups.push_back(std::move(g));
  }
  return GroupPartition(std::move(groups),
                        Eigen::VectorXd::Ones(static_cast<Eigen::Index>(sizes.size())));
}

GroupedDesign with_rule_weights(GroupedDesign design, WeightRule rule) {
  design.partition.weights = make_weights(rule, design.ranks);
  return design;
}

LambdaSequence make_lambda(const SimConfig& c, const std::vector<int>& sizes) {
  Eigen::VectorXd w = make_weights(c.weights_rule, sizes);
  switch (c.lambda_kind) {
    case LambdaKind::max: return lambda_max(c.q, w, sizes, c.m);
    case LambdaKind::mean: return lambda_mean(c.q, w, sizes, c.m);
    case LambdaKind::corrected: return lambda_corrected(c.q, w, sizes, c.m, c.n);
    case LambdaKind::custom: break;
  }
  throw std::invalid_argument("sim config: lambda kind must be max, mean or corrected");
}

}  // namespace

double signal_strength(int m, int l) {
  double bound = max_chi_sq_bound(m, l);
  if (!(bound > static_cast<double>(l)))
    throw std::domain_error("signal_strength: expression under the root is nonpositive");
  return std::sqrt(bound - l);
}

double max_chi_sq_bound(int m, int l) {
  if (m < 2) throw std::domain_error("max_chi_sq_bound: m must be >= 2");
  if (l < 1) throw std::domain_error("max_chi_sq_bound: l must be >= 1");
  double denom = 1.0 - std::pow(static_cast<double>(m), -2.0 / l);
  return 4.0 * std::log(static_cast<double>(m)) / denom;
}

std::vector<int> resolve_group_sizes(const SimConfig& config, Philox& rng) {
  switch (config.size_spec.kind) {
    case GroupSizeSpec::Kind::fixed: {
      if (config.size_spec.fixed_size < 1)
        throw std::invalid_argument("group sizes: fixed size must be >= 1");
      return std::vector<int>(static_cast<std::size_t>(config.m), config.size_spec.fixed_size);
    }
    case GroupSizeSpec::Kind::list: {
      if (static_cast<int>(config.size_spec.sizes.size()) != config.m)
        throw std::invalid_argument("group sizes: list length must equal m");
      for (int s : config.size_spec.sizes)
        if (s < 1) throw std::invalid_argument("group sizes: entries must be >= 1");
      return config.size_spec.sizes;
    }
    case GroupSizeSpec::Kind::binomial: {
      if (config.size_spec.trials < 0 || config.size_spec.prob < 0.0 ||
          config.size_spec.prob > 1.0)
        throw std::invalid_argument("group sizes: invalid binomial parameters");
      std::vector<int> sizes(static_cast<std::size_t>(config.m));
      for (auto& s : sizes)
        s = 1 + rng.next_binomial(config.size_spec.trials, config.size_spec.prob);
      return sizes;
    }
  }
  throw std::logic_error("group sizes: unreachable");
}

GroupedDesign gen_design(const SimConfig& config, const std::vector<int>& sizes,
                         Philox& rng) {
  const int n = config.n;
  const int p = std::accumulate(sizes.begin(), sizes.end(), 0);
  GroupPartition part = contiguous_partition(sizes);

  Eigen::MatrixXd X;
  switch (config.design) {
    case DesignKind::identity: {
      if (n < p) throw std::invalid_argument("gen_design: identity mode needs n >= p");
      X = Eigen::MatrixXd::Identity(n, p);
      break;
    }
    case DesignKind::orthogonal: {
      if (n < p) throw std::invalid_argument("gen_design: orthogonal mode needs n >= p");
      Eigen::MatrixXd G(n, p);
      for (int j = 0; j < p; ++j)
        for (int i = 0; i < n; ++i) G(i, j) = rng.next_normal();
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
      X = qr.householderQ() * Eigen::MatrixXd::Identity(n, p);
      break;
    }
    case DesignKind::gaussian: {
      const double sd = 1.0 / std::sqrt(static_cast<double>(n));
      X.resize(n, p);
      for (int j = 0; j < p; ++j)
        for (int i = 0; i < n; ++i) X(i, j) = sd * rng.next_normal();
      for (int j = 0; j < p; ++j) {
        X.col(j).array() -= X.col(j).mean();
        double nrm = X.col(j).norm();
        if (!(nrm > 0.0)) throw std::runtime_error("gen_design: degenerate column");
        X.col(j) /= nrm;
      }
      break;
    }
  }
  return with_rule_weights(build_grouped_design(X, std::move(part)), config.weights_rule);
}

GroupedDesign gen_design(const SimConfig& config, Philox& rng) {
  return gen_design(config, resolve_group_sizes(config, rng), rng);
}

Eigen::VectorXd gen_signal(const GroupedDesign& design, int k, Philox& rng) {
  const int m = design.num_groups();
  if (k < 0 || k > m) throw std::invalid_argument("gen_signal: need 0 <= k <= m");
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(design.p());
  if (k == 0) return beta;

  double sum_b = 0.0, sum_sqrt = 0.0;
  for (int l : design.ranks) {
    sum_b += signal_strength(m, l);
    sum_sqrt += std::sqrt(static_cast<double>(l));
  }
  const double a = sum_b / sum_sqrt;

  std::vector<int> idx(static_cast<std::size_t>(m));
  std::iota(idx.begin(), idx.end(), 0);
  for (int t = 0; t < k; ++t) {
    auto j = static_cast<std::size_t>(t) +
             static_cast<std::size_t>(rng.next_below(static_cast<std::uint64_t>(m - t)));
    std::swap(idx[static_cast<std::size_t>(t)], idx[j]);
  }

  for (int t = 0; t < k; ++t) {
    int gi = idx[static_cast<std::size_t>(t)];
    auto si = static_cast<std::size_t>(gi);
    const auto& vars = design.partition.groups[si];
    Eigen::VectorXd coef(static_cast<Eigen::Index>(vars.size()));
    for (Eigen::Index c = 0; c < coef.size(); ++c) coef[c] = 0.1 + rng.next_double();
    double effect = (design.R_blocks[si] * coef).norm();
    if (!(effect > 0.0)) throw std::runtime_error("gen_signal: zero-effect draw");
    double target = a * std::sqrt(static_cast<double>(design.ranks[si]));
    coef *= target / effect;
    for (std::size_t c = 0; c < vars.size(); ++c)
      beta[vars[c]] = coef[static_cast<Eigen::Index>(c)];
  }
  return beta;
}

SimulationReport run_experiment(const SimConfig& config) {
  validate_config(config);

  Philox sizes_rng(config.seed, kSizesStream);
  const std::vector<int> sizes = resolve_group_sizes(config, sizes_rng);
  const LambdaSequence lambda = make_lambda(config, sizes);

  // Identity and orthogonal designs are fixed across replications.
  std::unique_ptr<GroupedDesign> shared;
  if (config.design != DesignKind::gaussian) {
    Philox design_rng(config.seed, kDesignStream);
    shared = std::make_unique<GroupedDesign>(gen_design(config, sizes, design_rng));
  }

  const int R = config.replications;
  std::vector<double> fdp(static_cast<std::size_t>(R), 0.0);
  std::vector<double> pws(static_cast<std::size_t>(R), 0.0);
  std::vector<char> ok(static_cast<std::size_t>(R), 0);
  std::vector<std::string> errors(static_cast<std::size_t>(R));

  auto run_rep = [&](int r) {
    Philox rng(config.seed, kRepStreamBase + static_cast<std::uint64_t>(r));
    const GroupedDesign* design = shared.get();
    std::unique_ptr<GroupedDesign> local;
    if (config.design == DesignKind::gaussian) {
      local = std::make_unique<GroupedDesign>(gen_design(config, sizes, rng));
      design = local.get();
    }
    Eigen::VectorXd beta = gen_signal(*design, config.k, rng);
    Eigen::VectorXd y = design->X * beta;
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += rng.next_normal();

    std::vector<int> truth;
    for (int g = 0; g < config.m; ++g) {
      const auto& vars = design->partition.groups[static_cast<std::size_t>(g)];
      if (std::any_of(vars.begin(), vars.end(), [&](int v) { return beta[v] != 0.0; }))
        truth.push_back(g);
    }

    SolveOptions opts;
    SolveResult res;
    bool solved_ok;
    if (config.design == DesignKind::gaussian) {
      SigmaEstimationResult se = solve_with_sigma_estimation(*design, lambda, y, opts);
      res = std::move(se.result);
      solved_ok = se.converged && res.converged;
    } else {
      res = solve_orthogonal(*design, lambda, y, opts);
      solved_ok = res.converged;
    }
    if (!solved_ok) throw NonconvergenceError("replication solver did not converge",
                                              res.iterations, res.final_gap,
                                              res.final_infeasibility);

    int tp = 0;
    for (int g : res.selected)
      if (std::binary_search(truth.begin(), truth.end(), g)) ++tp;
    int Rg = static_cast<int>(res.selected.size());
    int Vg = Rg - tp;
    auto sr = static_cast<std::size_t>(r);
    fdp[sr] = static_cast<double>(Vg) / std::max(Rg, 1);
    pws[sr] = config.k > 0 ? static_cast<double>(tp) / config.k : 0.0;
    ok[sr] = 1;
  };

  auto worker_loop = [&](std::atomic<int>& next) {
    for (;;) {
      int r = next.fetch_add(1);
      if (r >= R) return;
      try {
        run_rep(r);
      } catch (const std::exception& e) {
        errors[static_cast<std::size_t>(r)] = e.what();
      }
    }
  };

  std::atomic<int> next{0};
  if (config.threads == 1) {
    worker_loop(next);
  } else {
    std::vector<std::thread> pool;
    int nt = std::min(config.threads, R);
    pool.reserve(static_cast<std::size_t>(nt));
    for (int t = 0; t < nt; ++t) pool.emplace_back([&] { worker_loop(next); });
    for (auto& th : pool) th.join();
  }

  SimulationReport rep;
  rep.config = config;
  rep.nominal_bound = config.q * (config.m - config.k) / config.m;
  double s1f = 0.0, s2f = 0.0, s1p = 0.0, s2p = 0.0;
  int good = 0;
  for (int r = 0; r < R; ++r) {
    auto sr = static_cast<std::size_t>(r);
    if (!ok[sr]) {
      ++rep.failures;
      if (rep.first_error.empty()) rep.first_error = errors[sr];
      continue;
    }
    rep.fdp.push_back(fdp[sr]);
    rep.power_share.push_back(pws[sr]);
    s1f += fdp[sr];
    s2f += fdp[sr] * fdp[sr];
    s1p += pws[sr];
    s2p += pws[sr] * pws[sr];
    ++good;
  }
  if (good > 0) {
    rep.gfdr_hat = s1f / good;
    rep.power_hat = s1p / good;
    if (good > 1) {
      double vf = std::max(0.0, (s2f - s1f * s1f / good) / (good - 1));
      double vp = std::max(0.0, (s2p - s1p * s1p / good) / (good - 1));
      rep.se_gfdr = std::sqrt(vf / good);
      rep.se_power = std::sqrt(vp / good);
    }
  }
  return rep;
}

}  // namespace gslope
