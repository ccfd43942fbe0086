#pragma once

// Tuning grids, cross-validation, and the two baseline estimators:
// a pooled Lasso (one coefficient vector shared by all datasets) and
// separate per-dataset Lassos.

#include <cofu/lasso.hpp>
#include <cofu/parallel.hpp>
#include <cofu/rng.hpp>
#include <cofu/solver_glm.hpp>
#include <cofu/solver_lr.hpp>
#include <cofu/types.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace cofu {

enum class Model { lr, logit };
enum class GridMode { cv, roc };

/// Tuning grid: lambda1 descending, lambda2 as listed (ascending).
struct TuningGrid {
  std::vector<double> lambda1;
  std::vector<double> lambda2;
  GridMode mode = GridMode::cv;
};

/// Smallest l1 weight that zeroes every dataset's Lasso fit:
/// max_k || (X^k)' y^k / n_k ||_inf.
inline double lambda1_max(const MultiDataset& data) {
  double m = 0.0;
  for (int k = 0; k < data.K(); ++k) {
    const Dataset& d = data.dataset(k);
    const Vector c = d.X.transpose() * d.y / static_cast<double>(d.X.rows());
    m = std::max(m, c.lpNorm<Eigen::Infinity>());
  }
  return m;
}

/// Builds the default grid: 20 log-spaced lambda1 values down from
/// lambda1_max (floor fraction 0.01 for cv mode, 0.001 for roc mode) crossed
/// with lambda2 in {0.001, 0.01, 0.1, 1} (cv) or {0, 0.001, 0.01, 0.1, 1, 10}
/// (roc).
inline TuningGrid make_grid(const MultiDataset& data, GridMode mode,
                            int n_lambda1 = 20) {
  const double lmax = lambda1_max(data);
  if (!(lmax > 0.0))
    throw std::invalid_argument(
        "make_grid: lambda1_max is zero (degenerate data)");
  if (n_lambda1 < 2)
    throw std::invalid_argument("make_grid: need at least 2 lambda1 values");
  const double floor_frac = mode == GridMode::cv ? 0.01 : 0.001;
  TuningGrid grid;
  grid.mode = mode;
  grid.lambda1.resize(static_cast<std::size_t>(n_lambda1));
  for (int i = 0; i < n_lambda1; ++i)
    grid.lambda1[static_cast<std::size_t>(i)] =
        lmax * std::pow(floor_frac,
                        static_cast<double>(i) /
                            static_cast<double>(n_lambda1 - 1));
  grid.lambda1.front() = lmax;
  grid.lambda1.back() = floor_frac * lmax;
  if (mode == GridMode::cv)
    grid.lambda2 = {0.001, 0.01, 0.1, 1.0};
  else
    grid.lambda2 = {0.0, 0.001, 0.01, 0.1, 1.0, 10.0};
  return grid;
}

/// Per-dataset fold labels: fold id for each observation, drawn by shuffling
/// each dataset independently (folds are paired across datasets by fold id,
/// not by observation).  Sizes differ by at most one; earlier folds absorb
/// remainders.
inline std::vector<std::vector<int>> draw_folds(const MultiDataset& data,
                                                int V, std::uint64_t seed) {
  if (V < 2) throw std::invalid_argument("draw_folds: V must be >= 2");
  std::vector<std::vector<int>> folds(static_cast<std::size_t>(data.K()));
  for (int k = 0; k < data.K(); ++k) {
    const Index n = data.n(k);
    if (n < V)
      throw std::invalid_argument("draw_folds: dataset " +
                                  std::to_string(k + 1) +
                                  " has fewer observations than folds");
    std::vector<int> order(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = int(i);
    Rng rng(seed, {static_cast<std::uint64_t>(Stream::folds),
                   static_cast<std::uint64_t>(k)});
    rng.shuffle(order);
    std::vector<int> label(static_cast<std::size_t>(n));
    const Index base = n / V, extra = n % V;
    Index pos = 0;
    for (int v = 0; v < V; ++v) {
      const Index size = base + (v < extra ? 1 : 0);
      for (Index i = 0; i < size; ++i)
        label[static_cast<std::size_t>(order[static_cast<std::size_t>(pos++)])] =
            v;
    }
    folds[static_cast<std::size_t>(k)] = std::move(label);
  }
  return folds;
}

namespace detail {

struct FoldSplit {
  MultiDataset train;
  std::vector<Matrix> val_X;
  std::vector<Vector> val_y;
};

inline FoldSplit split_fold(const MultiDataset& data,
                            const std::vector<std::vector<int>>& folds,
                            int v) {
  std::vector<Dataset> train;
  std::vector<Matrix> val_X;
  std::vector<Vector> val_y;
  for (int k = 0; k < data.K(); ++k) {
    const Dataset& d = data.dataset(k);
    const auto& label = folds[static_cast<std::size_t>(k)];
    std::vector<Index> tr, va;
    for (Index i = 0; i < d.X.rows(); ++i)
      (label[static_cast<std::size_t>(i)] == v ? va : tr).push_back(i);
    Matrix Xtr(static_cast<Index>(tr.size()), d.X.cols());
    Vector ytr(static_cast<Index>(tr.size()));
    for (std::size_t i = 0; i < tr.size(); ++i) {
      Xtr.row(static_cast<Index>(i)) = d.X.row(tr[i]);
      ytr[static_cast<Index>(i)] = d.y[tr[i]];
    }
    Matrix Xva(static_cast<Index>(va.size()), d.X.cols());
    Vector yva(static_cast<Index>(va.size()));
    for (std::size_t i = 0; i < va.size(); ++i) {
      Xva.row(static_cast<Index>(i)) = d.X.row(va[i]);
      yva[static_cast<Index>(i)] = d.y[va[i]];
    }
    train.push_back({std::move(Xtr), std::move(ytr)});
    val_X.push_back(std::move(Xva));
    val_y.push_back(std::move(yva));
  }
  return {MultiDataset(std::move(train)), std::move(val_X), std::move(val_y)};
}

/// Validation loss: mean squared error summed over datasets (lr) or mean
/// negative log-likelihood summed over datasets (logit).
inline double validation_loss(const std::vector<Matrix>& val_X,
                              const std::vector<Vector>& val_y,
                              const CoefficientPanel& panel, Model model) {
  double loss = 0.0;
  for (std::size_t k = 0; k < val_X.size(); ++k) {
    const Index nv = val_X[k].rows();
    if (nv == 0) continue;
    const Vector z = val_X[k] * panel.col(static_cast<Index>(k));
    if (model == Model::lr) {
      loss += (val_y[k] - z).squaredNorm() / static_cast<double>(nv);
    } else {
      double acc = 0.0;
      for (Index i = 0; i < nv; ++i)
        acc += log1pexp(z[i]) - val_y[k][i] * z[i];
      loss += acc / static_cast<double>(nv);
    }
  }
  return loss;
}

}  // namespace detail

/// Cross-validation output for the fused solver.
struct CvReport {
  TuningGrid grid;
  Matrix mean_loss;  ///< n_lambda1 x n_lambda2, fold-averaged
  double selected_lambda1 = 0.0;
  double selected_lambda2 = 0.0;
  int selected_i = 0;  ///< index into grid.lambda1
  int selected_j = 0;  ///< index into grid.lambda2
  std::vector<std::vector<int>> folds;
  int nonconverged_fits = 0;
};

/// V-fold cross-validation over the full (lambda1, lambda2) grid.  Within a
/// (fold, lambda2) chain the lambda1 values are visited in descending order
/// with the previous fit as warm start, so results are identical for any
/// thread count.  Ties are broken toward larger lambda1, then larger lambda2.
inline CvReport cv_select(const MultiDataset& data,
                          const CommunityPartition& partition,
                          const TuningGrid& grid, int V, std::uint64_t seed,
                          Model model = Model::lr, int threads = 1) {
  if (grid.lambda1.empty() || grid.lambda2.empty())
    throw std::invalid_argument("cv_select: empty grid");
  const int n1 = static_cast<int>(grid.lambda1.size());
  const int n2 = static_cast<int>(grid.lambda2.size());

  CvReport report;
  report.grid = grid;
  report.folds = draw_folds(data, V, seed);

  std::vector<detail::FoldSplit> splits;
  splits.reserve(static_cast<std::size_t>(V));
  for (int v = 0; v < V; ++v)
    splits.push_back(detail::split_fold(data, report.folds, v));

  std::vector<std::unique_ptr<FactorCache>> caches(
      static_cast<std::size_t>(V));
  if (model == Model::lr)
    for (int v = 0; v < V; ++v)
      caches[static_cast<std::size_t>(v)] =
          std::make_unique<FactorCache>(splits[static_cast<std::size_t>(v)].train,
                                        PenaltyConfig{}.sigma);

  // loss[v](i, j) for fold v, lambda1 index i, lambda2 index j.
  std::vector<Matrix> loss(static_cast<std::size_t>(V),
                           Matrix::Zero(n1, n2));
  std::vector<int> bad(static_cast<std::size_t>(V * n2), 0);

  parallel_for(V * n2, threads, [&](int task) {
    const int v = task / n2;
    const int j = task % n2;
    const auto& split = splits[static_cast<std::size_t>(v)];
    CoefficientPanel warm =
        CoefficientPanel::Zero(data.p(), data.K());
    for (int i = 0; i < n1; ++i) {
      PenaltyConfig cfg;
      cfg.lambda1 = grid.lambda1[static_cast<std::size_t>(i)];
      cfg.lambda2 = grid.lambda2[static_cast<std::size_t>(j)];
      FitResult fit =
          model == Model::lr
              ? solve(split.train, partition, cfg, &warm,
                      caches[static_cast<std::size_t>(v)].get())
              : solve_glm(split.train, partition, cfg, &warm);
      if (!fit.converged) ++bad[static_cast<std::size_t>(task)];
      loss[static_cast<std::size_t>(v)](i, j) =
          detail::validation_loss(split.val_X, split.val_y, fit.panel, model);
      warm = fit.panel;
    }
  });

  report.mean_loss = Matrix::Zero(n1, n2);
  for (int v = 0; v < V; ++v) report.mean_loss += loss[static_cast<std::size_t>(v)];
  report.mean_loss /= static_cast<double>(V);
  for (int b : bad) report.nonconverged_fits += b;

  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j) {
      const double cur = report.mean_loss(i, j);
      const double l1 = grid.lambda1[static_cast<std::size_t>(i)];
      const double l2 = grid.lambda2[static_cast<std::size_t>(j)];
      bool take = cur < best;
      if (cur == best) {
        if (l1 > report.selected_lambda1)
          take = true;
        else if (l1 == report.selected_lambda1 && l2 > report.selected_lambda2)
          take = true;
      }
      if (take) {
        best = cur;
        report.selected_i = i;
        report.selected_j = j;
        report.selected_lambda1 = l1;
        report.selected_lambda2 = l2;
      }
    }
  return report;
}

/// Pooled-Lasso baseline: every dataset shares one coefficient vector, fit
/// on the sample-size-normalized pooled problem
///   min_b (1/2K) sum_k (1/n_k) ||y^k - X^k b||^2 + lambda1 ||b||_1,
/// then replicated across the K panel columns.
inline CoefficientPanel fit_plasso(const MultiDataset& data, double lambda1,
                                   Model model = Model::lr) {
  const Index p = data.p();
  const int K = data.K();
  Vector b;
  if (model == Model::lr) {
    Matrix G = Matrix::Zero(p, p);
    Vector c = Vector::Zero(p);
    for (int k = 0; k < K; ++k) {
      const Dataset& d = data.dataset(k);
      const double nk = static_cast<double>(d.X.rows());
      G.noalias() += d.X.transpose() * d.X / nk;
      c.noalias() += d.X.transpose() * d.y / nk;
    }
    G /= static_cast<double>(K);
    c /= static_cast<double>(K);
    b = cd_lasso_gram(G, c, lambda1);
  } else {
    // Pooled logistic: stack rows, weight each dataset by 1/(K n_k).
    Index total = data.total_n();
    Matrix X(total, p);
    Vector y(total), w(total);
    Index pos = 0;
    for (int k = 0; k < K; ++k) {
      const Dataset& d = data.dataset(k);
      const Index nk = d.X.rows();
      X.middleRows(pos, nk) = d.X;
      y.segment(pos, nk) = d.y;
      w.segment(pos, nk).setConstant(1.0 / (static_cast<double>(K) *
                                            static_cast<double>(nk)));
      pos += nk;
    }
    // Weighted accelerated proximal gradient; the gradient's Lipschitz bound
    // is lambda_max(X' diag(w) X) / 4, estimated by power iteration.
    Vector pw = Vector::Ones(p).normalized();
    double norm2 = 1.0;
    for (int it = 0; it < 50; ++it) {
      Vector xw = X * pw;
      pw = X.transpose() * w.cwiseProduct(xw);
      norm2 = pw.norm();
      if (norm2 == 0.0) break;
      pw /= norm2;
    }
    const double lip = std::max(norm2 / 4.0, 1e-12);
    const double step = 1.0 / lip;
    Vector beta = Vector::Zero(p), accel = beta, prev = beta;
    double t_prev = 1.0;
    for (int it = 0; it < 2000; ++it) {
      const Vector z = X * accel;
      Vector resid(total);
      for (Index i = 0; i < total; ++i) resid[i] = w[i] * (expit(z[i]) - y[i]);
      const Vector grad = X.transpose() * resid;
      beta = soft_threshold(accel - step * grad, step * lambda1);
      const double t = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_prev * t_prev));
      accel = beta + ((t_prev - 1.0) / t) * (beta - prev);
      const double change = (beta - prev).lpNorm<Eigen::Infinity>();
      prev = beta;
      t_prev = t;
      if (change < 1e-8 && it > 0) break;
    }
    b = beta;
  }
  CoefficientPanel panel(p, K);
  for (int k = 0; k < K; ++k) panel.col(k) = b;
  return panel;
}

/// Separate-Lasso baseline: dataset k is fit on its own at lambda1s[k].
inline CoefficientPanel fit_slasso(const MultiDataset& data,
                                   const std::vector<double>& lambda1s,
                                   Model model = Model::lr) {
  if (static_cast<int>(lambda1s.size()) != data.K())
    throw std::invalid_argument("fit_slasso: need one lambda1 per dataset");
  CoefficientPanel panel(data.p(), data.K());
  for (int k = 0; k < data.K(); ++k) {
    const Dataset& d = data.dataset(k);
    panel.col(k) = model == Model::lr
                       ? cd_lasso(d.X, d.y, lambda1s[static_cast<std::size_t>(k)])
                       : l1_logistic(d.X, d.y,
                                     lambda1s[static_cast<std::size_t>(k)]);
  }
  return panel;
}

}  // namespace cofu
