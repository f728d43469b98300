#include "gslope/solver.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace gslope {

namespace {

// Per-column scale vector of M: block i carries 1/w_i.
Eigen::VectorXd column_scales(const GroupedDesign& design) {
  Eigen::VectorXd s(design.ptilde());
  for (int i = 0; i < design.num_groups(); ++i) {
    s.segment(design.offsets[static_cast<std::size_t>(i)],
              design.ranks[static_cast<std::size_t>(i)])
        .setConstant(1.0 / design.partition.weights[i]);
  }
  return s;
}

void validate_solve_inputs(const GroupedDesign& design, const LambdaSequence& lambda,
                           const Eigen::VectorXd& y, const SolveOptions& opts) {
  if (lambda.size() != design.num_groups())
    throw std::invalid_argument("solve: lambda length must equal the group count");
  if (y.size() != design.n())
    throw std::invalid_argument("solve: y length must equal the row count");
  if (!(opts.dual_gap_tol > 0.0) || !(opts.infeas_tol > 0.0) || opts.max_iter < 1 ||
      !(opts.sigma > 0.0) || !(opts.lipschitz >= 0.0))
    throw std::invalid_argument("solve: options must be positive");
}

// Fills beta/effects/selected of a result from standardized coordinates.
void recover_from_eta(const GroupedDesign& design, const Eigen::VectorXd& eta,
                      SolveResult& res) {
  const int m = design.num_groups();
  res.eta = eta;
  res.beta = Eigen::VectorXd::Zero(design.p());
  res.effects.resize(m);
  for (int i = 0; i < m; ++i) {
    auto si = static_cast<std::size_t>(i);
    Eigen::VectorXd c =
        eta.segment(design.offsets[si], design.ranks[si]) / design.partition.weights[i];
    res.effects[i] = c.norm();
    Eigen::VectorXd bi = design.Rpinv_blocks[si] * c;
    const auto& idx = design.partition.groups[si];
    for (std::size_t j = 0; j < idx.size(); ++j)
      res.beta[idx[j]] = bi[static_cast<Eigen::Index>(j)];
  }
  res.selected.clear();
  double max_eff = res.effects.size() ? res.effects.maxCoeff() : 0.0;
  if (max_eff > 0.0) {
    for (int i = 0; i < m; ++i)
      if (res.effects[i] > 1e-10 * max_eff) res.selected.push_back(i);
  }
}

double power_iteration_scaled(const Eigen::MatrixXd& Xtilde, const Eigen::VectorXd& s) {
  const Eigen::Index pt = Xtilde.cols();
  Eigen::VectorXd v(pt);
  for (Eigen::Index i = 0; i < pt; ++i) v[i] = 1.0 + 1e-3 * static_cast<double>(i);
  v.normalize();
  double est = 0.0;
  for (int iter = 0; iter < 500; ++iter) {
    Eigen::VectorXd w = s.cwiseProduct(Xtilde.transpose() * (Xtilde * s.cwiseProduct(v)));
    double nrm = w.norm();
    if (nrm == 0.0) return 0.0;
    v = w / nrm;
    if (std::abs(nrm - est) <= 1e-6 * nrm) return nrm;
    est = nrm;
  }
  return est;
}

}  // namespace

double lipschitz_estimate(const GroupedDesign& design) {
  return power_iteration_scaled(design.Xtilde, column_scales(design));
}

double duality_gap(const Eigen::VectorXd& eta, const Eigen::VectorXd& y,
                   const GroupedDesign& design, const LambdaSequence& lambda,
                   double sigma) {
  if (eta.size() != design.ptilde() || y.size() != design.n())
    throw std::invalid_argument("duality_gap: shape mismatch");
  Eigen::VectorXd s = column_scales(design);
  Eigen::VectorXd fit = design.Xtilde * s.cwiseProduct(eta);
  double J = sorted_l1_norm(lambda.scaled(sigma), block_norms(eta, design.ranks));
  return fit.dot(y - fit) - J;
}

double infeasibility(const Eigen::VectorXd& mu, const GroupedDesign& design,
                     const LambdaSequence& lambda) {
  if (mu.size() != design.n()) throw std::invalid_argument("infeasibility: shape mismatch");
  Eigen::VectorXd s = column_scales(design);
  Eigen::VectorXd z = s.cwiseProduct(design.Xtilde.transpose() * mu);
  return std::max(dual_norm(lambda, block_norms(z, design.ranks)) - 1.0, 0.0);
}

SolveResult solve_gslope(const GroupedDesign& design, const LambdaSequence& lambda,
                         const Eigen::VectorXd& y, const SolveOptions& opts,
                         const Eigen::VectorXd* warm_eta) {
  validate_solve_inputs(design, lambda, y, opts);
  const Eigen::Index pt = design.ptilde();
  const LambdaSequence effl = lambda.scaled(opts.sigma);
  const Eigen::VectorXd s = column_scales(design);
  const auto& sizes = design.ranks;

  double L = opts.lipschitz > 0.0 ? opts.lipschitz : power_iteration_scaled(design.Xtilde, s);
  double t = 1.0 / L;

  Eigen::VectorXd eta = warm_eta ? *warm_eta : Eigen::VectorXd::Zero(pt);
  if (warm_eta && warm_eta->size() != pt)
    throw std::invalid_argument("solve_gslope: warm start length mismatch");
  Eigen::VectorXd Aeta = design.Xtilde * s.cwiseProduct(eta);
  Eigen::VectorXd v = eta, Av = Aeta;
  double theta = 1.0;
  double obj_prev = std::numeric_limits<double>::infinity();

  SolveResult res;
  double gap = 0.0, obj = 0.0;
  for (int k = 1; k <= opts.max_iter; ++k) {
    Eigen::VectorXd grad = s.cwiseProduct(design.Xtilde.transpose() * (Av - y));
    double f_v = 0.5 * (y - Av).squaredNorm();

    Eigen::VectorXd cand, Acand;
    double f_cand = 0.0;
    for (;;) {
      cand = prox_grouped(effl.scaled(t), sizes, v - t * grad);
      Acand = design.Xtilde * s.cwiseProduct(cand);
      f_cand = 0.5 * (y - Acand).squaredNorm();
      Eigen::VectorXd dvec = cand - v;
      double quad = f_v + grad.dot(dvec) + dvec.squaredNorm() / (2.0 * t);
      if (f_cand <= quad * (1.0 + 1e-12) + 1e-300 || t <= 1e-18 / L) break;
      t *= 0.5;
    }

    double J = sorted_l1_norm(effl, block_norms(cand, sizes));
    obj = f_cand + J;
    gap = Acand.dot(y - Acand) - J;
    res.iterations = k;

    if (std::abs(gap) <= opts.dual_gap_tol * (1.0 + std::abs(obj))) {
      double infeas = 0.0;
      if (effl[0] > 0.0) {
        Eigen::VectorXd z = s.cwiseProduct(design.Xtilde.transpose() * (y - Acand));
        infeas = std::max(dual_norm(effl, block_norms(z, sizes)) - 1.0, 0.0);
      }
      if (infeas <= opts.infeas_tol) {
        res.converged = true;
        res.final_gap = gap;
        res.final_infeasibility = infeas;
        res.objective = obj;
        recover_from_eta(design, cand, res);
        return res;
      }
    }

    double theta_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    Eigen::VectorXd v_next = cand + ((theta - 1.0) / theta_new) * (cand - eta);
    Eigen::VectorXd Av_next = Acand + ((theta - 1.0) / theta_new) * (Acand - Aeta);
    if (obj > obj_prev) {  // adaptive restart
      theta_new = 1.0;
      v_next = cand;
      Av_next = Acand;
    }
    obj_prev = obj;
    eta = std::move(cand);
    Aeta = std::move(Acand);
    v = std::move(v_next);
    Av = std::move(Av_next);
    theta = theta_new;
  }

  res.converged = false;
  res.final_gap = gap;
  res.objective = obj;
  double infeas = 0.0;
  if (effl[0] > 0.0) {
    Eigen::VectorXd z = s.cwiseProduct(design.Xtilde.transpose() * (y - Aeta));
    infeas = std::max(dual_norm(effl, block_norms(z, sizes)) - 1.0, 0.0);
  }
  res.final_infeasibility = infeas;
  recover_from_eta(design, eta, res);
  return res;
}

SolveResult solve_gslope(const GroupedDesign& design, const LambdaSequence& lambda,
                         const Eigen::VectorXd& y, const SolveOptions& opts) {
  return solve_gslope(design, lambda, y, opts, nullptr);
}

SolveResult solve_orthogonal(const GroupedDesign& design, const LambdaSequence& lambda,
                             const Eigen::VectorXd& y, const SolveOptions& opts) {
  validate_solve_inputs(design, lambda, y, opts);
  if (design.group_orthogonality_defect() > 1e-8)
    throw std::invalid_argument("solve_orthogonal: groups are not mutually orthogonal");

  const int m = design.num_groups();
  Eigen::VectorXd ytilde = design.Xtilde.transpose() * y;
  Eigen::VectorXd g = block_norms(ytilde, design.ranks);
  Eigen::VectorXd d = design.partition.weights.cwiseInverse();
  const LambdaSequence effl = lambda.scaled(opts.sigma);

  double gap_tol = opts.dual_gap_tol * (1.0 + 0.5 * g.squaredNorm());
  DiagonalSolveStats stats;
  Eigen::VectorXd c = solve_diagonal_slope(d, effl, g, gap_tol, opts.infeas_tol, &stats);

  SolveResult res;
  res.iterations = stats.iterations;
  res.final_gap = stats.gap;
  res.final_infeasibility = stats.infeasibility;
  res.objective = stats.objective + 0.5 * (y.squaredNorm() - g.squaredNorm());
  res.converged = stats.converged;

  Eigen::VectorXd eta(design.ptilde());
  for (int i = 0; i < m; ++i) {
    auto si = static_cast<std::size_t>(i);
    auto block = eta.segment(design.offsets[si], design.ranks[si]);
    if (g[i] > 0.0) {
      // eta = M^{-1} c_tilde with c_tilde block = c_i * ytilde block / (w_i g_i)
      block = (c[i] / g[i]) * ytilde.segment(design.offsets[si], design.ranks[si]);
    } else {
      block.setZero();
    }
  }
  recover_from_eta(design, eta, res);
  return res;
}

}  // namespace gslope
