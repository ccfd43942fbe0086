#pragma once

// Evaluation metrics and study machinery: commonality detection, effect and
// community identification rates, envelope ROC curves over the tuning grid,
// coefficient and prediction error summaries, holdout prediction error,
// observed occurrence (selection stability) indices, and marginal screening.

#include <cofu/eval_types.hpp>
#include <cofu/parallel.hpp>
#include <cofu/rng.hpp>
#include <cofu/selection.hpp>
#include <cofu/simgen.hpp>

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <vector>

namespace cofu {

enum class Method { cofu, slasso, plasso };
enum class RocTarget { effects, communities };

struct RatePair {
  std::optional<double> tpr;
  std::optional<double> fpr;
};

/// A community block is declared common between adjacent datasets k and k+1
/// when the l2 norm of the blockwise coefficient difference is below
/// `threshold`.  Returns L x (K-1), true = common.
inline BoolGrid detect_commonality(const CoefficientPanel& panel,
                                   const CommunityPartition& partition,
                                   double threshold = 0.01) {
  if (panel.rows() != partition.p())
    throw std::invalid_argument("detect_commonality: panel/partition mismatch");
  if (!(threshold >= 0.0))
    throw std::invalid_argument("detect_commonality: threshold must be >= 0");
  const int K = static_cast<int>(panel.cols());
  BoolGrid out(partition.L(), std::max(K - 1, 0));
  for (int l = 0; l < partition.L(); ++l)
    for (int k = 0; k + 1 < K; ++k) {
      double ss = 0.0;
      for (int i : partition.members(l)) {
        const double d = panel(i, k) - panel(i, k + 1);
        ss += d * d;
      }
      out(l, k) = std::sqrt(ss) < threshold;
    }
  return out;
}

/// Effect-identification rates: a coefficient is called selected when its
/// magnitude exceeds zero_tol.  Rates are absent when their denominator
/// (true positives or true negatives in the truth) is zero.
inline RatePair effect_rates(const CoefficientPanel& panel,
                             const BoolGrid& truth_effects,
                             double zero_tol = 0.0) {
  if (panel.rows() != truth_effects.rows() ||
      panel.cols() != truth_effects.cols())
    throw std::invalid_argument("effect_rates: shape mismatch");
  long tp = 0, fp = 0, pos = 0, neg = 0;
  for (Index j = 0; j < panel.rows(); ++j)
    for (Index k = 0; k < panel.cols(); ++k) {
      const bool truth = truth_effects(j, k);
      const bool called = std::abs(panel(j, k)) > zero_tol;
      if (truth) {
        ++pos;
        if (called) ++tp;
      } else {
        ++neg;
        if (called) ++fp;
      }
    }
  RatePair r;
  if (pos > 0) r.tpr = static_cast<double>(tp) / static_cast<double>(pos);
  if (neg > 0) r.fpr = static_cast<double>(fp) / static_cast<double>(neg);
  return r;
}

/// Community-differentiation rates.  The positive class is "different"
/// (blocks not identical), so TPR is the fraction of truly-different blocks
/// detected as different.  Inputs are "common" indicators.
inline RatePair community_rates(const BoolGrid& detected_common,
                                const BoolGrid& truth_common) {
  if (detected_common.rows() != truth_common.rows() ||
      detected_common.cols() != truth_common.cols())
    throw std::invalid_argument("community_rates: shape mismatch");
  long tp = 0, fp = 0, pos = 0, neg = 0;
  for (Index l = 0; l < truth_common.rows(); ++l)
    for (Index k = 0; k < truth_common.cols(); ++k) {
      const bool truly_different = !truth_common(l, k);
      const bool called_different = !detected_common(l, k);
      if (truly_different) {
        ++pos;
        if (called_different) ++tp;
      } else {
        ++neg;
        if (called_different) ++fp;
      }
    }
  RatePair r;
  if (pos > 0) r.tpr = static_cast<double>(tp) / static_cast<double>(pos);
  if (neg > 0) r.fpr = static_cast<double>(fp) / static_cast<double>(neg);
  return r;
}

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

/// Envelope ROC curve: the monotone upper staircase through the achievable
/// points (anchored at (0,0) and (1,1)) and the trapezoidal area under it.
struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

inline RocCurve roc_auc(const std::vector<RocPoint>& raw) {
  std::map<double, double> best;  // fpr -> max tpr
  best[0.0] = 0.0;
  best[1.0] = 1.0;
  for (const RocPoint& pt : raw) {
    if (!(pt.fpr >= 0.0 && pt.fpr <= 1.0 && pt.tpr >= 0.0 && pt.tpr <= 1.0))
      throw std::invalid_argument("roc_auc: point outside the unit square");
    auto [it, inserted] = best.emplace(pt.fpr, pt.tpr);
    if (!inserted) it->second = std::max(it->second, pt.tpr);
  }
  RocCurve curve;
  double running = 0.0;
  for (const auto& [fpr, tpr] : best) {
    running = std::max(running, tpr);
    curve.points.push_back({fpr, running});
  }
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const auto& a = curve.points[i - 1];
    const auto& b = curve.points[i];
    curve.auc += (b.fpr - a.fpr) * 0.5 * (a.tpr + b.tpr);
  }
  return curve;
}

struct GridRocPoint {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
  bool converged = true;
};

struct GridRocResult {
  std::vector<GridRocPoint> points;
  RocCurve curve;
  int nonconverged = 0;
};

namespace detail {

inline void check_roc_truth(const IdentificationTruth& truth,
                            RocTarget target) {
  long pos = 0, neg = 0;
  if (target == RocTarget::effects) {
    for (Index j = 0; j < truth.effects.rows(); ++j)
      for (Index k = 0; k < truth.effects.cols(); ++k)
        (truth.effects(j, k) ? pos : neg)++;
  } else {
    for (Index l = 0; l < truth.commonality.rows(); ++l)
      for (Index k = 0; k < truth.commonality.cols(); ++k)
        (truth.commonality(l, k) ? neg : pos)++;
  }
  if (pos == 0 || neg == 0)
    throw std::invalid_argument(
        "grid_roc: truth must contain both classes for the target");
}

inline RocPoint point_for(const CoefficientPanel& panel,
                          const CommunityPartition& partition,
                          const IdentificationTruth& truth, RocTarget target) {
  RatePair r;
  if (target == RocTarget::effects) {
    r = effect_rates(panel, truth.effects, 0.0);
  } else {
    r = community_rates(detect_commonality(panel, partition, 0.01),
                        truth.commonality);
  }
  return {r.fpr.value(), r.tpr.value()};
}

}  // namespace detail

/// Sweeps the tuning grid, recording one (FPR, TPR) operating point per grid
/// point, and summarizes them with the envelope AUC.  The fused method
/// visits all lambda1 x lambda2 pairs (warm-started along descending
/// lambda1 within each lambda2 chain); the baselines vary along lambda1
/// only.  Non-converged fits are kept but flagged.  The pooled baseline has
/// no community labels, so it only supports the effects target.
inline GridRocResult grid_roc(const MultiDataset& data,
                              const CommunityPartition& partition,
                              const IdentificationTruth& truth,
                              const TuningGrid& grid, RocTarget target,
                              Method method, Model model = Model::lr,
                              int threads = 1) {
  detail::check_roc_truth(truth, target);
  if (method == Method::plasso && target == RocTarget::communities)
    throw std::invalid_argument(
        "grid_roc: pooled baseline cannot address community differences");
  const int n1 = static_cast<int>(grid.lambda1.size());
  GridRocResult out;

  if (method == Method::cofu) {
    const int n2 = static_cast<int>(grid.lambda2.size());
    out.points.resize(static_cast<std::size_t>(n1 * n2));
    std::unique_ptr<FactorCache> cache;
    if (model == Model::lr)
      cache = std::make_unique<FactorCache>(data, PenaltyConfig{}.sigma);
    parallel_for(n2, threads, [&](int j) {
      CoefficientPanel warm = CoefficientPanel::Zero(data.p(), data.K());
      for (int i = 0; i < n1; ++i) {
        PenaltyConfig cfg;
        cfg.lambda1 = grid.lambda1[static_cast<std::size_t>(i)];
        cfg.lambda2 = grid.lambda2[static_cast<std::size_t>(j)];
        const FitResult fit =
            model == Model::lr
                ? solve(data, partition, cfg, &warm, cache.get())
                : solve_glm(data, partition, cfg, &warm);
        const RocPoint pt =
            detail::point_for(fit.panel, partition, truth, target);
        out.points[static_cast<std::size_t>(j * n1 + i)] = {
            cfg.lambda1, cfg.lambda2, pt.fpr, pt.tpr, fit.converged};
        warm = fit.panel;
      }
    });
  } else {
    out.points.resize(static_cast<std::size_t>(n1));
    for (int i = 0; i < n1; ++i) {
      const double l1 = grid.lambda1[static_cast<std::size_t>(i)];
      CoefficientPanel panel =
          method == Method::slasso
              ? fit_slasso(data,
                           std::vector<double>(static_cast<std::size_t>(data.K()), l1),
                           model)
              : fit_plasso(data, l1, model);
      const RocPoint pt = detail::point_for(panel, partition, truth, target);
      out.points[static_cast<std::size_t>(i)] = {l1, 0.0, pt.fpr, pt.tpr, true};
    }
  }

  std::vector<RocPoint> pts;
  pts.reserve(out.points.size());
  for (const auto& gp : out.points) {
    pts.push_back({gp.fpr, gp.tpr});
    if (!gp.converged) ++out.nonconverged;
  }
  out.curve = roc_auc(pts);
  return out;
}

/// Root total squared coefficient error across datasets.
inline double ermse(const CoefficientPanel& estimate,
                    const CoefficientPanel& truth) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols())
    throw std::invalid_argument("ermse: shape mismatch");
  return (estimate - truth).norm();
}

/// Root total squared prediction error across datasets (unnormalized).
inline double prmse(const MultiDataset& data,
                    const CoefficientPanel& estimate) {
  if (estimate.rows() != data.p() || estimate.cols() != data.K())
    throw std::invalid_argument("prmse: shape mismatch");
  double ss = 0.0;
  for (int k = 0; k < data.K(); ++k) {
    const Dataset& d = data.dataset(k);
    ss += (d.y - d.X * estimate.col(k)).squaredNorm();
  }
  return std::sqrt(ss);
}

/// Per-observation variant of prmse.
inline double prmse_per_obs(const MultiDataset& data,
                            const CoefficientPanel& estimate) {
  const double raw = prmse(data, estimate);
  return raw / std::sqrt(static_cast<double>(data.total_n()));
}

/// A tuned final fit for one method.
struct TunedFit {
  CoefficientPanel panel;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  bool converged = true;
  int nonconverged_fits = 0;  ///< across the tuning fits
};

namespace detail {

/// Per-dataset Lasso path CV used by the separate baseline: returns the
/// selected lambda1 for one (X, y) problem.  `dataset_index` keys the fold
/// stream so different datasets draw different folds.
inline double cv_lasso_single(const Matrix& X, const Vector& y, int V,
                              std::uint64_t seed, int dataset_index,
                              Model model) {
  const double lmax =
      (X.transpose() * y / static_cast<double>(X.rows()))
          .lpNorm<Eigen::Infinity>();
  if (!(lmax > 0.0)) return 0.0;  // degenerate: selection is moot, fit zero
  const int n_lambda = 20;
  std::vector<double> lambdas(n_lambda);
  for (int i = 0; i < n_lambda; ++i)
    lambdas[static_cast<std::size_t>(i)] =
        lmax * std::pow(0.01, static_cast<double>(i) / (n_lambda - 1));
  lambdas.front() = lmax;
  lambdas.back() = 0.01 * lmax;

  const Index n = X.rows();
  std::vector<int> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = int(i);
  Rng rng(seed, {static_cast<std::uint64_t>(Stream::folds),
                 static_cast<std::uint64_t>(dataset_index)});
  rng.shuffle(order);
  std::vector<int> label(static_cast<std::size_t>(n));
  const Index base = n / V, extra = n % V;
  Index pos = 0;
  for (int v = 0; v < V; ++v) {
    const Index size = base + (v < extra ? 1 : 0);
    for (Index i = 0; i < size; ++i)
      label[static_cast<std::size_t>(order[static_cast<std::size_t>(pos++)])] = v;
  }

  std::vector<double> loss(static_cast<std::size_t>(n_lambda), 0.0);
  for (int v = 0; v < V; ++v) {
    std::vector<Index> tr, va;
    for (Index i = 0; i < n; ++i)
      (label[static_cast<std::size_t>(i)] == v ? va : tr).push_back(i);
    Matrix Xtr(static_cast<Index>(tr.size()), X.cols());
    Vector ytr(static_cast<Index>(tr.size()));
    for (std::size_t i = 0; i < tr.size(); ++i) {
      Xtr.row(static_cast<Index>(i)) = X.row(tr[i]);
      ytr[static_cast<Index>(i)] = y[tr[i]];
    }
    Matrix Xva(static_cast<Index>(va.size()), X.cols());
    Vector yva(static_cast<Index>(va.size()));
    for (std::size_t i = 0; i < va.size(); ++i) {
      Xva.row(static_cast<Index>(i)) = X.row(va[i]);
      yva[static_cast<Index>(i)] = y[va[i]];
    }
    const double ntr = static_cast<double>(Xtr.rows());
    Vector beta = Vector::Zero(X.cols());
    Matrix G;
    Vector c;
    if (model == Model::lr) {
      G = Xtr.transpose() * Xtr / ntr;
      c = Xtr.transpose() * ytr / ntr;
    }
    for (int i = 0; i < n_lambda; ++i) {
      beta = model == Model::lr
                 ? cd_lasso_gram(G, c, lambdas[static_cast<std::size_t>(i)], {},
                                 &beta)
                 : l1_logistic(Xtr, ytr, lambdas[static_cast<std::size_t>(i)],
                               2000, 1e-8, &beta);
      const Vector z = Xva * beta;
      if (Xva.rows() == 0) continue;
      if (model == Model::lr) {
        loss[static_cast<std::size_t>(i)] +=
            (yva - z).squaredNorm() / static_cast<double>(Xva.rows());
      } else {
        double acc = 0.0;
        for (Index i2 = 0; i2 < z.size(); ++i2)
          acc += log1pexp(z[i2]) - yva[i2] * z[i2];
        loss[static_cast<std::size_t>(i)] += acc / static_cast<double>(Xva.rows());
      }
    }
  }
  int best = 0;
  for (int i = 1; i < n_lambda; ++i)
    if (loss[static_cast<std::size_t>(i)] < loss[static_cast<std::size_t>(best)])
      best = i;  // ties keep the earlier (larger) lambda1
  return lambdas[static_cast<std::size_t>(best)];
}

/// Pooled-problem lambda path CV for the pooled baseline.
inline double cv_plasso(const MultiDataset& data, int V, std::uint64_t seed,
                        Model model) {
  const Index p = data.p();
  const int K = data.K();
  Vector c_pool = Vector::Zero(p);
  for (int k = 0; k < K; ++k) {
    const Dataset& d = data.dataset(k);
    c_pool += d.X.transpose() * d.y / static_cast<double>(d.X.rows());
  }
  c_pool /= static_cast<double>(K);
  const double lmax = c_pool.lpNorm<Eigen::Infinity>();
  if (!(lmax > 0.0)) return 0.0;
  const int n_lambda = 20;
  std::vector<double> lambdas(static_cast<std::size_t>(n_lambda));
  for (int i = 0; i < n_lambda; ++i)
    lambdas[static_cast<std::size_t>(i)] =
        lmax * std::pow(0.01, static_cast<double>(i) / (n_lambda - 1));
  lambdas.front() = lmax;
  lambdas.back() = 0.01 * lmax;

  const auto folds = draw_folds(data, V, seed);
  std::vector<double> loss(static_cast<std::size_t>(n_lambda), 0.0);
  for (int v = 0; v < V; ++v) {
    const FoldSplit split = split_fold(data, folds, v);
    if (model == Model::lr) {
      Matrix G = Matrix::Zero(p, p);
      Vector c = Vector::Zero(p);
      for (int k = 0; k < K; ++k) {
        const Dataset& d = split.train.dataset(k);
        const double nk = static_cast<double>(d.X.rows());
        G.noalias() += d.X.transpose() * d.X / nk;
        c.noalias() += d.X.transpose() * d.y / nk;
      }
      G /= static_cast<double>(K);
      c /= static_cast<double>(K);
      Vector beta = Vector::Zero(p);
      for (int i = 0; i < n_lambda; ++i) {
        beta = cd_lasso_gram(G, c, lambdas[static_cast<std::size_t>(i)], {},
                             &beta);
        CoefficientPanel panel(p, K);
        for (int k = 0; k < K; ++k) panel.col(k) = beta;
        loss[static_cast<std::size_t>(i)] +=
            validation_loss(split.val_X, split.val_y, panel, model);
      }
    } else {
      for (int i = 0; i < n_lambda; ++i) {
        const CoefficientPanel panel = fit_plasso(
            split.train, lambdas[static_cast<std::size_t>(i)], model);
        loss[static_cast<std::size_t>(i)] +=
            validation_loss(split.val_X, split.val_y, panel, model);
      }
    }
  }
  int best = 0;
  for (int i = 1; i < n_lambda; ++i)
    if (loss[static_cast<std::size_t>(i)] < loss[static_cast<std::size_t>(best)])
      best = i;
  return lambdas[static_cast<std::size_t>(best)];
}

}  // namespace detail

/// Tunes and fits one method on the given data: the fused solver via grid
/// CV, the separate baseline via per-dataset lambda CV, the pooled baseline
/// via pooled lambda CV.  Degenerate data (all-zero responses) yields the
/// zero panel.
inline TunedFit tune_and_fit(const MultiDataset& data,
                             const CommunityPartition& partition,
                             Method method, Model model, int V,
                             std::uint64_t seed, int threads = 1) {
  TunedFit out;
  if (method == Method::cofu) {
    double lmax = 0.0;
    try {
      lmax = lambda1_max(data);
    } catch (...) {
    }
    if (!(lmax > 0.0)) {
      out.panel = CoefficientPanel::Zero(data.p(), data.K());
      return out;
    }
    const TuningGrid grid = make_grid(data, GridMode::cv);
    const CvReport report =
        cv_select(data, partition, grid, V, seed, model, threads);
    PenaltyConfig cfg;
    cfg.lambda1 = report.selected_lambda1;
    cfg.lambda2 = report.selected_lambda2;
    const FitResult fit = model == Model::lr
                              ? solve(data, partition, cfg)
                              : solve_glm(data, partition, cfg);
    out.panel = fit.panel;
    out.lambda1 = cfg.lambda1;
    out.lambda2 = cfg.lambda2;
    out.converged = fit.converged;
    out.nonconverged_fits = report.nonconverged_fits + (fit.converged ? 0 : 1);
  } else if (method == Method::slasso) {
    std::vector<double> picks(static_cast<std::size_t>(data.K()), 0.0);
    for (int k = 0; k < data.K(); ++k) {
      const Dataset& d = data.dataset(k);
      picks[static_cast<std::size_t>(k)] =
          detail::cv_lasso_single(d.X, d.y, V, seed, k, model);
    }
    out.panel = fit_slasso(data, picks, model);
    out.lambda1 = picks.empty() ? 0.0 : picks[0];
  } else {
    const double pick = detail::cv_plasso(data, V, seed, model);
    out.panel = fit_plasso(data, pick, model);
    out.lambda1 = pick;
  }
  return out;
}

/// Splits each dataset 2:1 (train ceil(2n/3), test the rest), tunes and fits
/// on the training part, and returns the per-observation RMSE over all test
/// rows pooled.
inline double holdout_rmse(const MultiDataset& data,
                           const CommunityPartition& partition, Method method,
                           Model model, std::uint64_t seed, int V = 5,
                           int threads = 1) {
  std::vector<Dataset> train;
  std::vector<Matrix> test_X;
  std::vector<Vector> test_y;
  for (int k = 0; k < data.K(); ++k) {
    const Dataset& d = data.dataset(k);
    const Index n = d.X.rows();
    Rng rng(seed, {static_cast<std::uint64_t>(Stream::holdout),
                   static_cast<std::uint64_t>(k)});
    std::vector<int> order(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = int(i);
    rng.shuffle(order);
    const Index ntr = (2 * n + 2) / 3;  // ceil(2n/3)
    std::vector<int> tr(order.begin(), order.begin() + ntr);
    std::vector<int> te(order.begin() + ntr, order.end());
    std::sort(tr.begin(), tr.end());
    std::sort(te.begin(), te.end());
    Matrix Xtr(static_cast<Index>(tr.size()), d.X.cols());
    Vector ytr(static_cast<Index>(tr.size()));
    for (std::size_t i = 0; i < tr.size(); ++i) {
      Xtr.row(static_cast<Index>(i)) = d.X.row(tr[i]);
      ytr[static_cast<Index>(i)] = d.y[tr[i]];
    }
    Matrix Xte(static_cast<Index>(te.size()), d.X.cols());
    Vector yte(static_cast<Index>(te.size()));
    for (std::size_t i = 0; i < te.size(); ++i) {
      Xte.row(static_cast<Index>(i)) = d.X.row(te[i]);
      yte[static_cast<Index>(i)] = d.y[te[i]];
    }
    train.push_back({std::move(Xtr), std::move(ytr)});
    test_X.push_back(std::move(Xte));
    test_y.push_back(std::move(yte));
  }
  const MultiDataset train_data(std::move(train));
  const TunedFit fit =
      tune_and_fit(train_data, partition, method, model, V, seed, threads);
  double ss = 0.0;
  Index count = 0;
  for (std::size_t k = 0; k < test_X.size(); ++k) {
    ss += (test_y[k] - test_X[k] * fit.panel.col(static_cast<Index>(k)))
              .squaredNorm();
    count += test_X[k].rows();
  }
  if (count == 0) return 0.0;
  return std::sqrt(ss / static_cast<double>(count));
}

/// Observed occurrence index: the fraction of 2:1 resamples (without
/// replacement, per dataset) in which each predictor is selected by the
/// tuned method.  A predictor counts as selected when any dataset's
/// coefficient is nonzero.
inline Vector ooi(const MultiDataset& data, const CommunityPartition& partition,
                  Method method, Model model, int resamples,
                  std::uint64_t seed, int V = 5, int threads = 1) {
  if (resamples < 1)
    throw std::invalid_argument("ooi: resamples must be >= 1");
  const Index p = data.p();
  std::vector<std::vector<std::uint8_t>> hits(
      static_cast<std::size_t>(resamples));
  parallel_for(resamples, threads, [&](int rep) {
    std::vector<Dataset> sub;
    for (int k = 0; k < data.K(); ++k) {
      const Dataset& d = data.dataset(k);
      const Index n = d.X.rows();
      Rng rng(seed, {static_cast<std::uint64_t>(Stream::resample),
                     static_cast<std::uint64_t>(rep),
                     static_cast<std::uint64_t>(k)});
      std::vector<int> idx = rng.sample_without_replacement(
          static_cast<int>(n), static_cast<int>((2 * n + 2) / 3));
      std::sort(idx.begin(), idx.end());
      Matrix Xs(static_cast<Index>(idx.size()), d.X.cols());
      Vector ys(static_cast<Index>(idx.size()));
      for (std::size_t i = 0; i < idx.size(); ++i) {
        Xs.row(static_cast<Index>(i)) = d.X.row(idx[i]);
        ys[static_cast<Index>(i)] = d.y[idx[i]];
      }
      sub.push_back({std::move(Xs), std::move(ys)});
    }
    const MultiDataset sub_data(std::move(sub));
    const std::uint64_t sub_seed = derive_seed(
        seed, {static_cast<std::uint64_t>(Stream::resample),
               static_cast<std::uint64_t>(rep), 0xf01d5ULL});
    const TunedFit fit =
        tune_and_fit(sub_data, partition, method, model, V, sub_seed, 1);
    std::vector<std::uint8_t> sel(static_cast<std::size_t>(p), 0);
    for (Index j = 0; j < p; ++j)
      for (int k = 0; k < data.K(); ++k)
        if (fit.panel(j, k) != 0.0) {
          sel[static_cast<std::size_t>(j)] = 1;
          break;
        }
    hits[static_cast<std::size_t>(rep)] = std::move(sel);
  });
  Vector freq = Vector::Zero(p);
  for (const auto& sel : hits)
    for (Index j = 0; j < p; ++j)
      freq[j] += sel[static_cast<std::size_t>(j)];
  return freq / static_cast<double>(resamples);
}

/// Marginal screening: keeps a predictor when its Pearson correlation with
/// the response is significant (two-sided t test, p < alpha) in at least one
/// dataset.  Returns the kept predictor indices, ascending.
inline std::vector<int> marginal_screen(const MultiDataset& data,
                                        double alpha = 0.05) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("marginal_screen: alpha must be in (0, 1]");
  const Index p = data.p();
  std::vector<char> keep(static_cast<std::size_t>(p), 0);
  for (int k = 0; k < data.K(); ++k) {
    const Dataset& d = data.dataset(k);
    const Index n = d.X.rows();
    if (n < 3) continue;  // correlation test needs n - 2 > 0
    const boost::math::students_t dist(static_cast<double>(n - 2));
    const Vector yc = d.y.array() - d.y.mean();
    const double ynorm = yc.norm();
    for (Index j = 0; j < p; ++j) {
      const Vector xc = d.X.col(j).array() - d.X.col(j).mean();
      const double xnorm = xc.norm();
      if (xnorm == 0.0 || ynorm == 0.0) continue;
      double rho = xc.dot(yc) / (xnorm * ynorm);
      rho = std::max(-1.0, std::min(1.0, rho));
      double pval;
      if (std::abs(rho) >= 1.0) {
        pval = 0.0;
      } else {
        const double t = rho * std::sqrt(static_cast<double>(n - 2) /
                                         (1.0 - rho * rho));
        pval = 2.0 * boost::math::cdf(
                         boost::math::complement(dist, std::abs(t)));
      }
      if (pval < alpha) keep[static_cast<std::size_t>(j)] = 1;
    }
  }
  std::vector<int> kept;
  for (Index j = 0; j < p; ++j)
    if (keep[static_cast<std::size_t>(j)]) kept.push_back(static_cast<int>(j));
  return kept;
}

}  // namespace cofu
