#pragma once

// ADMM solver for the fused sparse regression objective
//
//   sum_k (1/2 n_k) ||y^k - X^k b^k||^2  +  lambda1 sum_k ||b^k||_1
//     +  lambda2 sum_{k=1..K-1} sum_l ||b^k_(l) - b^{k+1}_(l)||_2
//
// where b^k_(l) is the community-l block of dataset k's coefficients.
// The splitting introduces a sparse copy delta of the stacked coefficients,
// a copy eta of the adjacent-dataset differences, and scaled duals u, v.
// The quadratic step solves one SPD system per iteration whose matrix is
// fixed across iterations and tuning points, so it is factorized once and
// reused through a FactorCache.

#include <cofu/lasso.hpp>
#include <cofu/ops.hpp>
#include <cofu/rng.hpp>
#include <cofu/types.hpp>

#include <Eigen/Cholesky>

#include <array>
#include <cmath>
#include <memory>
#include <vector>

namespace cofu {

/// Output of one solver run.  `panel` is the reported (exactly sparse)
/// estimate; `raw_beta` is the smooth iterate it was thresholded from.
struct FitResult {
  CoefficientPanel panel;
  CoefficientPanel raw_beta;
  Vector eta;
  int iterations = 0;
  bool converged = false;
  double objective = 0.0;
  /// {||A b - eta||, ||b - delta||, ||delta change||, ||eta change||} at exit.
  std::array<double, 4> residual_norms{};
  /// Count of inner quasi-Newton solves that hit their iteration cap
  /// (always 0 on the linear-model path).
  int inner_failures = 0;
};

/// Reusable factorization of M = X'X + sigma (A'A + I) for fixed data and
/// sigma, where X is the block-diagonal of the X^k / sqrt(n_k) and A the
/// adjacent-difference operator.  Read-only after construction, so one cache
/// may serve concurrent solves.  When the total sample size is smaller than
/// p*K the solve goes through a low-rank (matrix-inversion-lemma) form whose
/// per-application cost scales with the sample size instead of (p*K)^2.
class FactorCache {
 public:
  FactorCache(const MultiDataset& data, double sigma)
      : sigma_(sigma),
        p_(data.p()),
        K_(data.K()),
        fingerprint_(data.fingerprint()) {
    if (!(sigma > 0.0) || !std::isfinite(sigma))
      throw std::invalid_argument("FactorCache: sigma must be finite and > 0");

    xty_.resize(p_ * K_);
    for (int k = 0; k < K_; ++k) {
      const Dataset& d = data.dataset(k);
      const double nk = static_cast<double>(d.X.rows());
      xty_.segment(k * p_, p_) = d.X.transpose() * d.y / nk;
    }

    // G = D'D + I_K for the (K-1) x K adjacent-difference matrix D, so that
    // A'A + I_{pK} = G kron I_p.
    Matrix G = Matrix::Identity(K_, K_);
    for (int k = 0; k + 1 < K_; ++k) {
      G(k, k) += 1.0;
      G(k + 1, k + 1) += 1.0;
      G(k, k + 1) -= 1.0;
      G(k + 1, k) -= 1.0;
    }
    Ginv_ = G.inverse();

    const Index N = data.total_n();
    low_rank_ = N < p_ * K_;
    if (low_rank_) {
      Xs_.reserve(K_);
      offsets_.resize(K_ + 1, 0);
      for (int k = 0; k < K_; ++k) {
        const Dataset& d = data.dataset(k);
        const double nk = static_cast<double>(d.X.rows());
        Xs_.push_back(d.X / std::sqrt(nk));
        offsets_[k + 1] = offsets_[k] + d.X.rows();
      }
      // S = I_N + (1/sigma) Xs (Ginv kron I_p) Xs'
      Matrix S = Matrix::Identity(N, N);
      for (int k = 0; k < K_; ++k)
        for (int k2 = 0; k2 <= k; ++k2) {
          const double w = Ginv_(k, k2) / sigma_;
          if (w == 0.0) continue;
          S.block(offsets_[k], offsets_[k2], Xs_[k].rows(), Xs_[k2].rows())
              .noalias() += w * (Xs_[k] * Xs_[k2].transpose());
        }
      S.triangularView<Eigen::StrictlyUpper>() =
          S.triangularView<Eigen::StrictlyLower>().transpose();
      llt_.compute(S);
    } else {
      Matrix M = Matrix::Zero(p_ * K_, p_ * K_);
      for (int k = 0; k < K_; ++k) {
        const Dataset& d = data.dataset(k);
        const double nk = static_cast<double>(d.X.rows());
        M.block(k * p_, k * p_, p_, p_).noalias() =
            d.X.transpose() * d.X / nk;
        M.block(k * p_, k * p_, p_, p_).diagonal().array() +=
            sigma_ * G(k, k);
        if (k + 1 < K_) {
          M.block(k * p_, (k + 1) * p_, p_, p_).diagonal().array() -= sigma_;
          M.block((k + 1) * p_, k * p_, p_, p_).diagonal().array() -= sigma_;
        }
      }
      llt_.compute(M);
    }
    if (llt_.info() != Eigen::Success)
      throw std::runtime_error("FactorCache: factorization failed");
  }

  /// Solves M x = rhs.
  Vector solve_system(const Vector& rhs) const {
    if (rhs.size() != p_ * K_)
      throw std::invalid_argument("FactorCache: rhs size mismatch");
    if (!low_rank_) return llt_.solve(rhs);
    const Vector z = apply_qinv(rhs);
    Vector w(offsets_.back());
    for (int k = 0; k < K_; ++k)
      w.segment(offsets_[k], Xs_[k].rows()).noalias() =
          Xs_[k] * z.segment(k * p_, p_);
    const Vector t = llt_.solve(w);
    Vector back(p_ * K_);
    for (int k = 0; k < K_; ++k)
      back.segment(k * p_, p_).noalias() =
          Xs_[k].transpose() * t.segment(offsets_[k], Xs_[k].rows());
    return z - apply_qinv(back);
  }

  const Vector& xty() const { return xty_; }
  double sigma() const { return sigma_; }
  Index p() const { return p_; }
  int K() const { return K_; }

  bool matches(const MultiDataset& data, double sigma) const {
    return sigma == sigma_ && data.p() == p_ && data.K() == K_ &&
           data.fingerprint() == fingerprint_;
  }

 private:
  // (1/sigma) (Ginv kron I_p) v, via the p x K reshape of v.
  Vector apply_qinv(const Vector& v) const {
    Vector out(p_ * K_);
    Eigen::Map<const Matrix> V(v.data(), p_, K_);
    Eigen::Map<Matrix> O(out.data(), p_, K_);
    O.noalias() = V * (Ginv_ / sigma_);
    return out;
  }

  double sigma_;
  Index p_;
  int K_;
  std::uint64_t fingerprint_;
  Vector xty_;
  Matrix Ginv_;
  bool low_rank_ = false;
  std::vector<Matrix> Xs_;
  std::vector<Index> offsets_;
  Eigen::LLT<Matrix> llt_;
};

/// Full objective value for a given panel.
inline double objective(const MultiDataset& data,
                        const CommunityPartition& partition,
                        const CoefficientPanel& panel,
                        const PenaltyConfig& cfg) {
  if (panel.rows() != data.p() || panel.cols() != data.K())
    throw std::invalid_argument("objective: panel shape mismatch");
  if (partition.p() != data.p())
    throw std::invalid_argument("objective: partition size mismatch");
  double fit = 0.0;
  for (int k = 0; k < data.K(); ++k) {
    const Dataset& d = data.dataset(k);
    fit += (d.y - d.X * panel.col(k)).squaredNorm() /
           (2.0 * static_cast<double>(d.X.rows()));
  }
  const double l1 = panel.cwiseAbs().sum();
  double fusion = 0.0;
  if (cfg.lambda2 != 0.0) {
    for (int k = 0; k + 1 < data.K(); ++k)
      for (int l = 0; l < partition.L(); ++l) {
        double ss = 0.0;
        for (int i : partition.members(l)) {
          const double d2 = panel(i, k) - panel(i, k + 1);
          ss += d2 * d2;
        }
        fusion += std::sqrt(ss);
      }
  }
  return fit + cfg.lambda1 * l1 + cfg.lambda2 * fusion;
}

/// Quadratic step: solves M b = X'y + sigma [A'(eta - u/sigma) + delta - v/sigma].
inline Vector beta_update(const FactorCache& cache, const Vector& delta,
                          const Vector& eta, const Vector& u, const Vector& v) {
  const double s = cache.sigma();
  const Vector tmp = s * eta - u;
  Vector rhs = cache.xty() +
               difference_apply_transpose(tmp, cache.p(), cache.K()) +
               s * delta - v;
  return cache.solve_system(rhs);
}

/// Sparsity step: soft threshold of beta + v/sigma at lambda1/sigma.
inline Vector delta_update(const Vector& beta, const Vector& v, double sigma,
                           double lambda1) {
  return soft_threshold(beta + v / sigma, lambda1 / sigma);
}

/// Fusion step: blockwise shrinkage of beta_k - beta_{k+1} + u_k/sigma at
/// lambda2/sigma, applied per community.
inline Vector eta_update(const Vector& beta, const Vector& u,
                         const CommunityPartition& partition, Index p, int K,
                         double sigma, double lambda2) {
  Vector eta(p * (K - 1));
  for (int k = 0; k + 1 < K; ++k) {
    const auto bk = beta.segment(k * p, p);
    const auto bk1 = beta.segment((k + 1) * p, p);
    const auto uk = u.segment(k * p, p);
    auto ek = eta.segment(k * p, p);
    for (int l = 0; l < partition.L(); ++l) {
      const auto& members = partition.members(l);
      Vector d(static_cast<Index>(members.size()));
      for (std::size_t m = 0; m < members.size(); ++m) {
        const int i = members[m];
        d[static_cast<Index>(m)] = bk[i] - bk1[i] + uk[i] / sigma;
      }
      const Vector shrunk = group_shrink(d, lambda2 / sigma);
      for (std::size_t m = 0; m < members.size(); ++m)
        ek[members[m]] = shrunk[static_cast<Index>(m)];
    }
  }
  return eta;
}

/// Per-dataset Lasso fits at lambda1, used as the solver's starting point.
inline CoefficientPanel lasso_panel(const MultiDataset& data, double lambda1) {
  CoefficientPanel panel(data.p(), data.K());
  for (int k = 0; k < data.K(); ++k) {
    const Dataset& d = data.dataset(k);
    panel.col(k) = cd_lasso(d.X, d.y, lambda1);
  }
  return panel;
}

/// Runs the ADMM iteration to convergence (or max_iter).  `init` seeds the
/// coefficients; absent, the per-dataset Lasso fit at the same lambda1 is
/// used.  `cache` must match (data, cfg.sigma) when supplied.
inline FitResult solve(const MultiDataset& data,
                       const CommunityPartition& partition,
                       const PenaltyConfig& cfg,
                       const CoefficientPanel* init = nullptr,
                       const FactorCache* cache = nullptr) {
  cfg.validate();
  if (partition.p() != data.p())
    throw std::invalid_argument("solve: partition size mismatch");
  const Index p = data.p();
  const int K = data.K();

  std::unique_ptr<FactorCache> local;
  if (cache != nullptr) {
    if (!cache->matches(data, cfg.sigma))
      throw std::invalid_argument("solve: cache does not match data/sigma");
  } else {
    local = std::make_unique<FactorCache>(data, cfg.sigma);
    cache = local.get();
  }

  CoefficientPanel start;
  if (init != nullptr) {
    if (init->rows() != p || init->cols() != K)
      throw std::invalid_argument("solve: init shape mismatch");
    if (!init->allFinite())
      throw std::invalid_argument("solve: init contains non-finite values");
    start = *init;
  } else {
    start = lasso_panel(data, cfg.lambda1);
  }

  const double s = cfg.sigma;
  Vector beta = stack_panel(start);
  Vector delta = beta;
  Vector eta = difference_apply(beta, p, K);
  Vector u = Vector::Zero(p * (K - 1));
  Vector v = Vector::Zero(p * K);

  FitResult res;
  for (int t = 1; t <= cfg.max_iter; ++t) {
    beta = beta_update(*cache, delta, eta, u, v);
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
  res.objective = objective(data, partition, res.panel, cfg);
  return res;
}

}  // namespace cofu
