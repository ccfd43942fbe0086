#pragma once

// Synthetic data generation: community-structured predictors whose
// correlation comes from a degree-corrected blockmodel network, overlapping
// effect patterns across datasets, and Gaussian or Bernoulli responses.
// Every routine is a pure function of its inputs plus a seed.

#include <cofu/eval_types.hpp>
#include <cofu/rng.hpp>
#include <cofu/types.hpp>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

namespace cofu {

struct NetworkSpec {
  double gamma = 2.5;        ///< degree distribution exponent
  double mean_degree = 10.0;
  int min_degree = 3;
  double q_between = 0.02;   ///< cross-community connection factor
  double q_within_lo = 0.3;  ///< within-community factor ~ U[lo, hi]
  double q_within_hi = 0.5;
  double w_within_lo = 0.5;  ///< within-community edge weight ~ U[lo, hi]
  double w_within_hi = 1.0;
  double w_between_lo = 0.2;
  double w_between_hi = 0.5;
};

enum class CorrelationKind { structured, unstructured, independence };

/// Predictor correlation matrix plus a record of the eigenvalue repair that
/// produced it (the raw matrix is shifted so its smallest eigenvalue is 1/p).
struct CorrelationModel {
  CorrelationKind kind = CorrelationKind::independence;
  Matrix sigma;
  double shift = 0.0;           ///< amount subtracted from the diagonal
  double min_eig_before = 1.0;  ///< smallest eigenvalue of the raw matrix
};

enum class CoefficientRule { constant_half, uniform, graded };

struct EffectScheme {
  int r = 100;           ///< important effects per dataset
  double rho_all = 0.0;  ///< fraction of communities shared by all datasets
  double rho_half = 0.0; ///< fraction with chained pairwise sharing
  double rho_none = 1.0; ///< fraction with dataset-specific effects only
  CoefficientRule rule = CoefficientRule::constant_half;

  void validate() const {
    if (r < 0) throw std::invalid_argument("EffectScheme: r must be >= 0");
    if (rho_all < 0 || rho_half < 0 || rho_none < 0)
      throw std::invalid_argument("EffectScheme: negative category fraction");
    if (std::abs(rho_all + rho_half + rho_none - 1.0) > 1e-12)
      throw std::invalid_argument(
          "EffectScheme: category fractions must sum to 1");
  }
};

enum class ResponseModel { lr, logit };

struct SimScenario {
  Index p = 1000;
  int K = 3;
  std::vector<Index> n = {200, 200, 200};  ///< per-dataset sample sizes
  int L = 50;
  CorrelationKind corr = CorrelationKind::structured;
  NetworkSpec network;
  EffectScheme effects;
  ResponseModel model = ResponseModel::lr;
  std::uint64_t seed = 1;

  void validate() const {
    if (p < 1 || K < 1 || L < 1)
      throw std::invalid_argument("SimScenario: p, K, L must be >= 1");
    if (static_cast<int>(n.size()) != K)
      throw std::invalid_argument("SimScenario: need one sample size per dataset");
    for (Index nk : n)
      if (nk < 1) throw std::invalid_argument("SimScenario: n must be >= 1");
    effects.validate();
  }
};

/// Draws community sizes uniformly from [ceil(3p/4L), floor(5p/4L)], adjusts
/// them one unit at a time (round-robin) to sum to p, and assigns predictors
/// to communities in contiguous runs.
inline CommunityPartition assign_communities(Index p, int L,
                                             std::uint64_t seed) {
  if (p < 1 || L < 1)
    throw std::invalid_argument("assign_communities: p and L must be >= 1");
  const Index lo = (3 * p + 4 * L - 1) / (4 * L);  // ceil(3p / 4L)
  const Index hi = (5 * p) / (4 * L);              // floor(5p / 4L)
  if (lo > hi || L * lo > p || L * hi < p)
    throw std::invalid_argument(
        "assign_communities: no size vector in [ceil(3p/4L), floor(5p/4L)] "
        "sums to p");
  Rng rng(seed);
  std::vector<Index> sizes(static_cast<std::size_t>(L));
  Index total = 0;
  for (auto& s : sizes) {
    s = static_cast<Index>(rng.uniform_int(lo, hi));
    total += s;
  }
  int l = 0;
  while (total != p) {
    auto& s = sizes[static_cast<std::size_t>(l)];
    if (total < p && s < hi) {
      ++s;
      ++total;
    } else if (total > p && s > lo) {
      --s;
      --total;
    }
    l = (l + 1) % L;
  }
  std::vector<int> assignment;
  assignment.reserve(static_cast<std::size_t>(p));
  for (int c = 0; c < L; ++c)
    for (Index i = 0; i < sizes[static_cast<std::size_t>(c)]; ++i)
      assignment.push_back(c);
  return CommunityPartition(std::move(assignment), L);
}

/// Samples p target degrees from the truncated discrete power law
/// P(d) proportional to d^(-gamma) on [min_degree, floor(sqrt(mean_degree*p))].
inline std::vector<int> sample_degrees(Index p, const NetworkSpec& spec,
                                       std::uint64_t seed) {
  const int d_max = static_cast<int>(
      std::floor(std::sqrt(spec.mean_degree * static_cast<double>(p))));
  if (d_max < spec.min_degree)
    throw std::invalid_argument(
        "sample_degrees: degree support is empty (p too small)");
  std::vector<double> cdf(static_cast<std::size_t>(d_max - spec.min_degree + 1));
  double total = 0.0;
  for (int d = spec.min_degree; d <= d_max; ++d) {
    total += std::pow(static_cast<double>(d), -spec.gamma);
    cdf[static_cast<std::size_t>(d - spec.min_degree)] = total;
  }
  for (auto& c : cdf) c /= total;
  Rng rng(seed);
  std::vector<int> degrees(static_cast<std::size_t>(p));
  for (auto& deg : degrees) {
    const double u = rng.uniform01();
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    deg = spec.min_degree + static_cast<int>(it - cdf.begin());
  }
  return degrees;
}

/// Undirected simple graph from the degree-corrected blockmodel: an edge
/// (i, j) appears with probability min(1, c d_i d_j q_{m_i m_j}) where
/// c = mean_degree * p / Z and Z = sum over ordered pairs i != j of
/// d_i d_j q_{m_i m_j}.  The within-community factor q_l is drawn once per
/// community from U[q_within_lo, q_within_hi].
inline std::vector<std::pair<int, int>> build_network(
    const CommunityPartition& partition, const std::vector<int>& degrees,
    const NetworkSpec& spec, std::uint64_t seed) {
  const Index p = partition.p();
  if (static_cast<Index>(degrees.size()) != p)
    throw std::invalid_argument("build_network: degrees size mismatch");
  const int L = partition.L();
  Rng rng(seed);
  std::vector<double> q_within(static_cast<std::size_t>(L));
  for (auto& q : q_within) q = rng.uniform(spec.q_within_lo, spec.q_within_hi);

  auto q_of = [&](int l1, int l2) {
    return l1 == l2 ? q_within[static_cast<std::size_t>(l1)] : spec.q_between;
  };

  // Z via per-community degree sums: sum_{i != j} d_i d_j q_{m_i m_j}.
  std::vector<double> deg_sum(static_cast<std::size_t>(L), 0.0);
  std::vector<double> deg_sq(static_cast<std::size_t>(L), 0.0);
  for (Index i = 0; i < p; ++i) {
    const auto l = static_cast<std::size_t>(partition.community_of(i));
    const double d = degrees[static_cast<std::size_t>(i)];
    deg_sum[l] += d;
    deg_sq[l] += d * d;
  }
  double Z = 0.0;
  for (int l1 = 0; l1 < L; ++l1)
    for (int l2 = 0; l2 < L; ++l2) {
      double pairs = deg_sum[static_cast<std::size_t>(l1)] *
                     deg_sum[static_cast<std::size_t>(l2)];
      if (l1 == l2) pairs -= deg_sq[static_cast<std::size_t>(l1)];
      Z += q_of(l1, l2) * pairs;
    }
  if (!(Z > 0.0)) throw std::invalid_argument("build_network: degenerate Z");
  const double c = spec.mean_degree * static_cast<double>(p) / Z;

  std::vector<std::pair<int, int>> edges;
  for (Index i = 0; i < p; ++i)
    for (Index j = i + 1; j < p; ++j) {
      const double prob =
          std::min(1.0, c * degrees[static_cast<std::size_t>(i)] *
                            degrees[static_cast<std::size_t>(j)] *
                            q_of(partition.community_of(i),
                                 partition.community_of(j)));
      if (rng.bernoulli(prob))
        edges.emplace_back(static_cast<int>(i), static_cast<int>(j));
    }
  return edges;
}

/// Builds the predictor correlation matrix.  The structured kind weights the
/// network's edges (within-community U[0.5,1], between U[0.2,0.5]); the
/// unstructured kind fills every off-diagonal pair from U[0.2,1];
/// independence is the identity.  Non-identity matrices are repaired by
/// subtracting (min_eig - 1/p) from the diagonal so the smallest eigenvalue
/// is exactly 1/p.
inline CorrelationModel correlation_matrix(
    CorrelationKind kind, const CommunityPartition& partition,
    const std::vector<std::pair<int, int>>& edges, const NetworkSpec& spec,
    std::uint64_t seed) {
  const Index p = partition.p();
  CorrelationModel model;
  model.kind = kind;
  if (kind == CorrelationKind::independence) {
    model.sigma = Matrix::Identity(p, p);
    return model;
  }
  Rng rng(seed);
  Matrix raw = Matrix::Identity(p, p);
  if (kind == CorrelationKind::structured) {
    for (const auto& [i, j] : edges) {
      const bool same = partition.community_of(i) == partition.community_of(j);
      const double w = same ? rng.uniform(spec.w_within_lo, spec.w_within_hi)
                            : rng.uniform(spec.w_between_lo, spec.w_between_hi);
      raw(i, j) = w;
      raw(j, i) = w;
    }
  } else {
    for (Index i = 0; i < p; ++i)
      for (Index j = i + 1; j < p; ++j) {
        const double w = rng.uniform(0.2, 1.0);
        raw(i, j) = w;
        raw(j, i) = w;
      }
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(raw, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("correlation_matrix: eigenvalue solve failed");
  model.min_eig_before = es.eigenvalues().minCoeff();
  model.shift = model.min_eig_before - 1.0 / static_cast<double>(p);
  model.sigma = std::move(raw);
  model.sigma.diagonal().array() -= model.shift;
  return model;
}

/// True coefficients plus the derived ground-truth labels.
struct EffectDraw {
  CoefficientPanel panel;
  IdentificationTruth truth;
};

/// Generates the true coefficient panel.  Communities are shuffled and split
/// into three categories by (rho_all, rho_half, rho_none) with counts
/// floor(rho * L) and remainders going to the dataset-specific category.
/// Each dataset receives exactly r important positions, allocated
/// round-robin over communities (community id order) and placed uniformly at
/// random within each community:
///  - shared-by-all communities: one position set, identical values in every
///    dataset;
///  - chained-sharing communities (K = 3 only): the per-dataset quota m
///    splits into ceil(m/2) positions shared by datasets 1-2 and floor(m/2)
///    shared by datasets 2-3 (identical values within a shared pair), plus
///    floor(m/2) positions specific to dataset 1 and ceil(m/2) specific to
///    dataset 3;
///  - dataset-specific communities: disjoint position sets per dataset.
/// Values: constant_half puts 0.5 everywhere; uniform draws each effect from
/// U[0.2, 1]; graded (K = 3 only) draws effects present in dataset 2 from
/// U[0.4, 0.7], effects specific to dataset 1 from U[0.1, 0.3], and effects
/// specific to dataset 3 from U[0.8, 1].
inline EffectDraw gen_effects(const CommunityPartition& partition,
                              const EffectScheme& scheme, int K,
                              std::uint64_t seed) {
  scheme.validate();
  if (K < 1) throw std::invalid_argument("gen_effects: K must be >= 1");
  const int L = partition.L();
  const Index p = partition.p();
  const int r = scheme.r;

  const int count_all = static_cast<int>(
      std::floor(scheme.rho_all * L + 1e-9));
  const int count_half = static_cast<int>(
      std::floor(scheme.rho_half * L + 1e-9));
  if (count_all + count_half > L)
    throw std::invalid_argument("gen_effects: category counts exceed L");
  const bool needs_three = count_half > 0 ||
                           scheme.rule == CoefficientRule::graded;
  if (needs_three && K != 3)
    throw std::invalid_argument(
        "gen_effects: chained sharing and graded values require K = 3");

  Rng rng(seed);
  std::vector<int> order(static_cast<std::size_t>(L));
  for (int l = 0; l < L; ++l) order[static_cast<std::size_t>(l)] = l;
  rng.shuffle(order);
  // 0 = shared by all, 1 = chained, 2 = dataset-specific.
  std::vector<int> category(static_cast<std::size_t>(L), 2);
  for (int i = 0; i < count_all; ++i)
    category[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = 0;
  for (int i = count_all; i < count_all + count_half; ++i)
    category[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = 1;

  EffectDraw draw;
  draw.panel = CoefficientPanel::Zero(p, K);

  // Per-community, per-dataset quota: distribute r round-robin by id.
  const int base = L > 0 ? r / L : 0;
  const int extra = L > 0 ? r % L : 0;

  auto value_for = [&](int presence) {
    // presence: 0 = in dataset 2 (any sharing), 1 = only dataset 1,
    //           2 = only dataset 3, 3 = not dataset-resolved (shared by all
    //           or K != 3 specific).
    switch (scheme.rule) {
      case CoefficientRule::constant_half:
        return 0.5;
      case CoefficientRule::uniform:
        return rng.uniform(0.2, 1.0);
      case CoefficientRule::graded:
        if (presence == 1) return rng.uniform(0.1, 0.3);
        if (presence == 2) return rng.uniform(0.8, 1.0);
        return rng.uniform(0.4, 0.7);
    }
    return 0.5;
  };

  for (int l = 0; l < L; ++l) {
    const int m = base + (l < extra ? 1 : 0);
    if (m == 0) continue;
    const auto& members = partition.members(l);
    const int size = static_cast<int>(members.size());
    const int cat = category[static_cast<std::size_t>(l)];
    const int needed = cat == 0 ? m : (cat == 1 ? 2 * m : K * m);
    if (needed > size)
      throw std::invalid_argument(
          "gen_effects: community " + std::to_string(l + 1) +
          " is too small for its quota (needs " + std::to_string(needed) +
          " positions, has " + std::to_string(size) + ")");
    std::vector<int> picks = rng.sample_without_replacement(size, needed);
    auto pos = [&](int idx) { return members[static_cast<std::size_t>(picks[static_cast<std::size_t>(idx)])]; };

    if (cat == 0) {
      for (int i = 0; i < m; ++i) {
        const double val = value_for(K == 3 ? 0 : 3);
        for (int k = 0; k < K; ++k) draw.panel(pos(i), k) = val;
      }
    } else if (cat == 1) {
      const int a = (m + 1) / 2;  // shared by datasets 1-2
      const int b = m / 2;        // shared by datasets 2-3
      int at = 0;
      for (int i = 0; i < a; ++i, ++at) {
        const double val = value_for(0);
        draw.panel(pos(at), 0) = val;
        draw.panel(pos(at), 1) = val;
      }
      for (int i = 0; i < b; ++i, ++at) {
        const double val = value_for(0);
        draw.panel(pos(at), 1) = val;
        draw.panel(pos(at), 2) = val;
      }
      for (int i = 0; i < m - a; ++i, ++at)  // specific to dataset 1
        draw.panel(pos(at), 0) = value_for(1);
      for (int i = 0; i < m - b; ++i, ++at)  // specific to dataset 3
        draw.panel(pos(at), 2) = value_for(2);
    } else {
      for (int k = 0; k < K; ++k)
        for (int i = 0; i < m; ++i) {
          int presence = 3;
          if (K == 3) presence = k == 0 ? 1 : (k == 1 ? 0 : 2);
          draw.panel(pos(k * m + i), k) = value_for(presence);
        }
    }
  }

  draw.truth.effects = draw.panel.array() != 0.0;
  draw.truth.commonality.resize(L, std::max(K - 1, 0));
  for (int l = 0; l < L; ++l)
    for (int k = 0; k + 1 < K; ++k) {
      bool same = true;
      for (int i : partition.members(l))
        if (draw.panel(i, k) != draw.panel(i, k + 1)) {
          same = false;
          break;
        }
      draw.truth.commonality(l, k) = same;
    }
  return draw;
}

/// Samples an n x p design with i.i.d. N(0, Sigma) rows using the Cholesky
/// factor of Sigma; draws are row-major for reproducibility.
inline Matrix sample_design(const Matrix& chol_lower, Index n, Rng& rng) {
  const Index p = chol_lower.rows();
  Matrix Z(n, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) Z(i, j) = rng.normal();
  return Z * chol_lower.transpose();
}

/// Attaches responses to the designs: y = X b + N(0, 1) noise for the linear
/// model, Bernoulli(expit(X b)) for the logit model.
inline MultiDataset gen_responses(const std::vector<Matrix>& designs,
                                  const CoefficientPanel& panel,
                                  ResponseModel model, std::uint64_t seed) {
  if (designs.empty())
    throw std::invalid_argument("gen_responses: no designs");
  if (panel.cols() != static_cast<Index>(designs.size()))
    throw std::invalid_argument("gen_responses: panel/designs mismatch");
  Rng rng(seed);
  std::vector<Dataset> out;
  out.reserve(designs.size());
  for (std::size_t k = 0; k < designs.size(); ++k) {
    const Matrix& X = designs[k];
    if (X.cols() != panel.rows())
      throw std::invalid_argument("gen_responses: design width mismatch");
    const Vector mean = X * panel.col(static_cast<Index>(k));
    Vector y(X.rows());
    if (model == ResponseModel::lr) {
      for (Index i = 0; i < y.size(); ++i) y[i] = mean[i] + rng.normal();
    } else {
      for (Index i = 0; i < y.size(); ++i) {
        const double prob = 1.0 / (1.0 + std::exp(-mean[i]));
        y[i] = rng.bernoulli(prob) ? 1.0 : 0.0;
      }
    }
    out.push_back({X, std::move(y)});
  }
  return MultiDataset(std::move(out));
}

/// One generated replicate with its ground truth.
struct Replicate {
  MultiDataset data;
  CommunityPartition partition;
  CoefficientPanel true_panel;
  IdentificationTruth truth;
  double corr_shift = 0.0;
  double corr_min_eig_before = 1.0;
};

/// Draws a complete replicate: partition, network, correlation, effects,
/// designs, responses.  Substreams are keyed by (scenario seed, replicate
/// index, purpose), so replicates are independent and order-free.
inline Replicate generate_replicate(const SimScenario& sc, int rep) {
  sc.validate();
  auto sub = [&](Stream s) {
    return derive_seed(sc.seed, {static_cast<std::uint64_t>(rep),
                                 static_cast<std::uint64_t>(s)});
  };
  CommunityPartition partition =
      assign_communities(sc.p, sc.L, sub(Stream::communities));
  CorrelationModel corr;
  if (sc.corr == CorrelationKind::structured) {
    const std::vector<int> degrees =
        sample_degrees(sc.p, sc.network, sub(Stream::degrees));
    const auto edges =
        build_network(partition, degrees, sc.network, sub(Stream::network));
    corr = correlation_matrix(CorrelationKind::structured, partition, edges,
                              sc.network, sub(Stream::correlation));
  } else {
    corr = correlation_matrix(sc.corr, partition, {}, sc.network,
                              sub(Stream::correlation));
  }
  Eigen::LLT<Matrix> llt(corr.sigma);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("generate_replicate: correlation not positive definite");
  const Matrix chol = llt.matrixL();

  Rng design_rng(sub(Stream::design));
  std::vector<Matrix> designs;
  designs.reserve(static_cast<std::size_t>(sc.K));
  for (int k = 0; k < sc.K; ++k)
    designs.push_back(
        sample_design(chol, sc.n[static_cast<std::size_t>(k)], design_rng));

  EffectDraw effects =
      gen_effects(partition, sc.effects, sc.K, sub(Stream::effects));
  MultiDataset data = gen_responses(designs, effects.panel, sc.model,
                                    sub(Stream::responses));
  return Replicate{std::move(data), std::move(partition),
                   std::move(effects.panel), std::move(effects.truth),
                   corr.shift, corr.min_eig_before};
}

}  // namespace cofu
