#pragma once

// Logistic-model variant of the fused solver.  Only the quadratic step
// changes: the coefficient update minimizes the penalized negative
// log-likelihood plus the two augmented quadratic terms, solved with a
// limited-memory quasi-Newton iteration.  The sparsity, fusion, and dual
// updates are shared with the linear-model path.

#include <cofu/lbfgs.hpp>
#include <cofu/ops.hpp>
#include <cofu/solver_lr.hpp>
#include <cofu/types.hpp>

#include <cmath>

namespace cofu {

/// Overflow-safe log(1 + exp(z)).
inline double log1pexp(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

inline double expit(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace detail {

inline void check_binary(const MultiDataset& data) {
  for (int k = 0; k < data.K(); ++k) {
    const Vector& y = data.dataset(k).y;
    for (Index i = 0; i < y.size(); ++i)
      if (y[i] != 0.0 && y[i] != 1.0)
        throw std::invalid_argument(
            "logit model requires responses in {0, 1}");
  }
}

}  // namespace detail

/// Sample-size-normalized negative log-likelihood of a panel:
/// sum_k (1/n_k) sum_i [log(1 + exp(z_i)) - y_i z_i] with z = X^k b^k.
inline double neg_loglik(const MultiDataset& data,
                         const CoefficientPanel& panel) {
  if (panel.rows() != data.p() || panel.cols() != data.K())
    throw std::invalid_argument("neg_loglik: panel shape mismatch");
  detail::check_binary(data);
  double total = 0.0;
  for (int k = 0; k < data.K(); ++k) {
    const Dataset& d = data.dataset(k);
    const Vector z = d.X * panel.col(k);
    double acc = 0.0;
    for (Index i = 0; i < z.size(); ++i)
      acc += log1pexp(z[i]) - d.y[i] * z[i];
    total += acc / static_cast<double>(d.X.rows());
  }
  return total;
}

/// Value and gradient of the coefficient subproblem
///   f(b) = negloglik(b) + (sigma/2)(||A b - eta + u/sigma||^2
///                                   + ||b - delta + v/sigma||^2).
inline double glm_subproblem(const MultiDataset& data, const Vector& beta,
                             const Vector& delta, const Vector& eta,
                             const Vector& u, const Vector& v, double sigma,
                             Vector& grad) {
  const Index p = data.p();
  const int K = data.K();
  grad.setZero(p * K);
  double value = 0.0;
  for (int k = 0; k < K; ++k) {
    const Dataset& d = data.dataset(k);
    const double nk = static_cast<double>(d.X.rows());
    const Vector z = d.X * beta.segment(k * p, p);
    Vector resid(z.size());
    double acc = 0.0;
    for (Index i = 0; i < z.size(); ++i) {
      acc += log1pexp(z[i]) - d.y[i] * z[i];
      resid[i] = expit(z[i]) - d.y[i];
    }
    value += acc / nk;
    grad.segment(k * p, p).noalias() = d.X.transpose() * resid / nk;
  }
  const Vector r1 = difference_apply(beta, p, K) - eta + u / sigma;
  const Vector r2 = beta - delta + v / sigma;
  value += 0.5 * sigma * (r1.squaredNorm() + r2.squaredNorm());
  grad += sigma * difference_apply_transpose(r1, p, K) + sigma * r2;
  return value;
}

/// Quasi-Newton solve of the coefficient subproblem, warm-started at beta0.
/// Sets `converged` false when the inner iteration cap is hit.
inline Vector glm_beta_update(const MultiDataset& data, const Vector& beta0,
                              const Vector& delta, const Vector& eta,
                              const Vector& u, const Vector& v, double sigma,
                              bool& converged,
                              const LbfgsOptions& opts = {}) {
  auto fg = [&](const Vector& b, Vector& grad) {
    return glm_subproblem(data, b, delta, eta, u, v, sigma, grad);
  };
  const LbfgsResult r = lbfgs_minimize(fg, beta0, opts);
  converged = r.converged;
  return r.x;
}

/// Per-dataset l1-penalized logistic fit via accelerated proximal gradient,
/// used as the solver's starting point (the zero-fusion analogue of the
/// Lasso start on the linear path).
inline Vector l1_logistic(const Matrix& X, const Vector& y, double lambda,
                          int max_iter = 2000, double tol = 1e-8,
                          const Vector* init = nullptr) {
  const Index n = X.rows(), p = X.cols();
  // Lipschitz constant of the gradient: ||X||_2^2 / (4 n), via power iteration.
  Vector w = Vector::Ones(p).normalized();
  double norm2 = 1.0;
  for (int it = 0; it < 50; ++it) {
    Vector xw = X * w;
    w = X.transpose() * xw;
    norm2 = w.norm();
    if (norm2 == 0.0) break;
    w /= norm2;
  }
  const double lip =
      std::max(norm2 / (4.0 * static_cast<double>(n)), 1e-12);
  const double step = 1.0 / lip;

  Vector beta = init != nullptr ? *init : Vector::Zero(p);
  Vector accel = beta, beta_prev = beta;
  double t_prev = 1.0;
  for (int it = 0; it < max_iter; ++it) {
    const Vector z = X * accel;
    Vector resid(n);
    for (Index i = 0; i < n; ++i) resid[i] = expit(z[i]) - y[i];
    const Vector grad = X.transpose() * resid / static_cast<double>(n);
    beta = soft_threshold(accel - step * grad, step * lambda);
    const double t = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_prev * t_prev));
    accel = beta + ((t_prev - 1.0) / t) * (beta - beta_prev);
    const double change = (beta - beta_prev).lpNorm<Eigen::Infinity>();
    beta_prev = beta;
    t_prev = t;
    if (change < tol && it > 0) break;
  }
  return beta;
}

/// Starting panel for the logistic solver: per-dataset l1-logistic fits.
inline CoefficientPanel l1_logistic_panel(const MultiDataset& data,
                                          double lambda1) {
  CoefficientPanel panel(data.p(), data.K());
  for (int k = 0; k < data.K(); ++k) {
    const Dataset& d = data.dataset(k);
    panel.col(k) = l1_logistic(d.X, d.y, lambda1);
  }
  return panel;
}

/// ADMM iteration for the logistic model.  Structure and stopping rule match
/// the linear-model solve(); the reported objective here is
/// neg_loglik + penalties.
inline FitResult solve_glm(const MultiDataset& data,
                           const CommunityPartition& partition,
                           const PenaltyConfig& cfg,
                           const CoefficientPanel* init = nullptr) {
  cfg.validate();
  if (partition.p() != data.p())
    throw std::invalid_argument("solve_glm: partition size mismatch");
  detail::check_binary(data);
  const Index p = data.p();
  const int K = data.K();

  CoefficientPanel start;
  if (init != nullptr) {
    if (init->rows() != p || init->cols() != K)
      throw std::invalid_argument("solve_glm: init shape mismatch");
    start = *init;
  } else {
    start = l1_logistic_panel(data, cfg.lambda1);
  }

  const double s = cfg.sigma;
  Vector beta = stack_panel(start);
  Vector delta = beta;
  Vector eta = difference_apply(beta, p, K);
  Vector u = Vector::Zero(p * (K - 1));
  Vector v = Vector::Zero(p * K);

  FitResult res;
  for (int t = 1; t <= cfg.max_iter; ++t) {
    bool inner_ok = true;
    beta = glm_beta_update(data, beta, delta, eta, u, v, s, inner_ok);
    if (!inner_ok) ++res.inner_failures;
    const Vector delta_new = delta_update(beta, v, s, cfg.lambda1);
    const Vector eta_new =
        eta_update(beta, u, partition, p, K, s, cfg.lambda2);
    const Vector abeta = difference_apply(beta, p, K);
    const double r_fuse = (abeta - eta_new).norm();
    const double r_split = (beta - delta_new).norm();
    const double r_dchange = (delta_new - delta).norm();
    const double r_echange = (eta_new - eta).norm();
    u += s * (abeta - eta_new);
    v += s * (beta - delta_new);
    delta = delta_new;
    eta = eta_new;
    res.iterations = t;
    res.residual_norms = {r_fuse, r_split, r_dchange, r_echange};
    if (std::max(std::max(r_fuse, r_split), std::max(r_dchange, r_echange)) <
        cfg.epsilon) {
      res.converged = true;
      break;
    }
  }

  res.panel = unstack_panel(delta, p, K);
  res.raw_beta = unstack_panel(beta, p, K);
  res.eta = eta;
  double fusion = 0.0;
  for (int k = 0; k + 1 < K; ++k)
    for (int l = 0; l < partition.L(); ++l) {
      double ss = 0.0;
      for (int i : partition.members(l)) {
        const double dd = res.panel(i, k) - res.panel(i, k + 1);
        ss += dd * dd;
      }
      fusion += std::sqrt(ss);
    }
  res.objective = neg_loglik(data, res.panel) +
                  cfg.lambda1 * res.panel.cwiseAbs().sum() +
                  cfg.lambda2 * fusion;
  return res;
}

}  // namespace cofu
