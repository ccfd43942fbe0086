#pragma once

// Core data containers shared by the solvers, the tuning machinery, and the
// simulation and evaluation layers.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cofu {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// A coefficient panel stores one column of length p per dataset (p x K).
using CoefficientPanel = Eigen::MatrixXd;

/// One design/response pair.
struct Dataset {
  Matrix X;
  Vector y;
};

namespace detail {

inline void hash_combine(std::uint64_t& h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
}

inline std::uint64_t hash_doubles(const double* data, std::size_t count,
                                  std::uint64_t h) {
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(double));
    std::memcpy(&bits, &data[i], sizeof(bits));
    hash_combine(h, bits);
  }
  return h;
}

}  // namespace detail

/// K related datasets sharing one predictor set.  Columns are aligned across
/// datasets; sample sizes may differ.
class MultiDataset {
 public:
  explicit MultiDataset(std::vector<Dataset> datasets)
      : datasets_(std::move(datasets)) {
    if (datasets_.empty())
      throw std::invalid_argument("MultiDataset: needs at least one dataset");
    p_ = datasets_[0].X.cols();
    if (p_ < 1) throw std::invalid_argument("MultiDataset: p must be >= 1");
    for (std::size_t k = 0; k < datasets_.size(); ++k) {
      const Dataset& d = datasets_[k];
      if (d.X.cols() != p_)
        throw std::invalid_argument(
            "MultiDataset: dataset " + std::to_string(k + 1) +
            " has mismatched predictor count");
      if (d.X.rows() != d.y.size())
        throw std::invalid_argument(
            "MultiDataset: dataset " + std::to_string(k + 1) +
            " has X rows != y length");
      if (d.X.rows() < 1)
        throw std::invalid_argument("MultiDataset: dataset " +
                                    std::to_string(k + 1) + " is empty");
      if (!d.X.allFinite() || !d.y.allFinite())
        throw std::invalid_argument("MultiDataset: dataset " +
                                    std::to_string(k + 1) +
                                    " contains non-finite values");
    }
    fingerprint_ = compute_fingerprint();
  }

  int K() const { return static_cast<int>(datasets_.size()); }
  Index p() const { return p_; }
  Index n(int k) const { return datasets_.at(k).X.rows(); }
  Index total_n() const {
    Index t = 0;
    for (const auto& d : datasets_) t += d.X.rows();
    return t;
  }
  const Dataset& dataset(int k) const { return datasets_.at(k); }
  const std::vector<Dataset>& datasets() const { return datasets_; }

  /// Content hash used to match cached factorizations to their data.
  std::uint64_t fingerprint() const { return fingerprint_; }

 private:
  std::uint64_t compute_fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    detail::hash_combine(h, static_cast<std::uint64_t>(datasets_.size()));
    detail::hash_combine(h, static_cast<std::uint64_t>(p_));
    for (const auto& d : datasets_) {
      detail::hash_combine(h, static_cast<std::uint64_t>(d.X.rows()));
      h = detail::hash_doubles(d.X.data(),
                               static_cast<std::size_t>(d.X.size()), h);
      h = detail::hash_doubles(d.y.data(),
                               static_cast<std::size_t>(d.y.size()), h);
    }
    return h;
  }

  std::vector<Dataset> datasets_;
  Index p_ = 0;
  std::uint64_t fingerprint_ = 0;
};

/// Assignment of the p predictors to L non-empty communities (0-based ids).
class CommunityPartition {
 public:
  CommunityPartition(std::vector<int> assignment, int L)
      : assignment_(std::move(assignment)), L_(L) {
    if (L_ < 1) throw std::invalid_argument("CommunityPartition: L must be >= 1");
    if (assignment_.empty())
      throw std::invalid_argument("CommunityPartition: empty assignment");
    members_.resize(static_cast<std::size_t>(L_));
    for (std::size_t i = 0; i < assignment_.size(); ++i) {
      const int l = assignment_[i];
      if (l < 0 || l >= L_)
        throw std::invalid_argument(
            "CommunityPartition: predictor " + std::to_string(i + 1) +
            " has out-of-range community id " + std::to_string(l));
      members_[static_cast<std::size_t>(l)].push_back(static_cast<int>(i));
    }
    for (int l = 0; l < L_; ++l)
      if (members_[static_cast<std::size_t>(l)].empty())
        throw std::invalid_argument("CommunityPartition: community " +
                                    std::to_string(l + 1) + " is empty");
  }

  int L() const { return L_; }
  Index p() const { return static_cast<Index>(assignment_.size()); }
  int community_of(Index i) const {
    return assignment_.at(static_cast<std::size_t>(i));
  }
  const std::vector<int>& members(int l) const {
    return members_.at(static_cast<std::size_t>(l));
  }
  const std::vector<int>& assignment() const { return assignment_; }

 private:
  std::vector<int> assignment_;
  int L_;
  std::vector<std::vector<int>> members_;
};

/// Penalty weights and solver controls.
struct PenaltyConfig {
  double lambda1 = 0.0;  ///< l1 weight on every coefficient
  double lambda2 = 0.0;  ///< fusion weight on adjacent-dataset community blocks
  double sigma = 2.0;    ///< augmented-Lagrangian parameter
  double epsilon = 1e-3; ///< stopping tolerance on the four residual norms
  int max_iter = 5000;

  void validate() const {
    if (!(lambda1 >= 0.0) || !std::isfinite(lambda1))
      throw std::invalid_argument("PenaltyConfig: lambda1 must be finite and >= 0");
    if (!(lambda2 >= 0.0) || !std::isfinite(lambda2))
      throw std::invalid_argument("PenaltyConfig: lambda2 must be finite and >= 0");
    if (!(sigma > 0.0) || !std::isfinite(sigma))
      throw std::invalid_argument("PenaltyConfig: sigma must be finite and > 0");
    if (!(epsilon > 0.0))
      throw std::invalid_argument("PenaltyConfig: epsilon must be > 0");
    if (max_iter < 1)
      throw std::invalid_argument("PenaltyConfig: max_iter must be >= 1");
  }
};

}  // namespace cofu
