#pragma once

// Coordinate-descent Lasso with covariance updates.
//
// Solves min_b (1/2n)||y - X b||^2 + lambda ||b||_1 through its Gram form
// min_b (1/2) b'G b - c'b + lambda ||b||_1 with G = X'X/n and c = X'y/n.
// This is a deliberately separate code path from the fused ADMM solver: it
// initializes that solver, drives both baseline fits, and acts as an
// independent reference for the zero-fusion case.

#include <cofu/ops.hpp>
#include <cofu/types.hpp>

#include <cmath>

namespace cofu {

struct LassoOptions {
  double tol = 1e-7;    ///< stop when no coordinate moves more than this
  int max_sweeps = 100000;
};

/// Gram-form coordinate descent; returns the coefficient vector.  `init`
/// optionally warm-starts the iteration (useful along a lambda path).
inline Vector cd_lasso_gram(const Matrix& G, const Vector& c, double lambda,
                            const LassoOptions& opts = {},
                            const Vector* init = nullptr) {
  const Index p = c.size();
  if (G.rows() != p || G.cols() != p)
    throw std::invalid_argument("cd_lasso_gram: G/c size mismatch");
  if (lambda < 0.0 || !std::isfinite(lambda))
    throw std::invalid_argument("cd_lasso_gram: lambda must be finite and >= 0");

  Vector beta = init != nullptr ? *init : Vector::Zero(p);
  if (beta.size() != p)
    throw std::invalid_argument("cd_lasso_gram: init size mismatch");
  Vector q = beta.isZero(0.0) ? Vector::Zero(p) : Vector(G * beta);

  auto sweep = [&](bool active_only) {
    double max_delta = 0.0;
    for (Index j = 0; j < p; ++j) {
      if (active_only && beta[j] == 0.0) continue;
      const double gjj = G(j, j);
      const double old = beta[j];
      double updated = 0.0;
      if (gjj > 0.0) {
        const double partial = c[j] - q[j] + gjj * old;
        updated = soft_threshold(partial, lambda) / gjj;
      }
      const double delta = updated - old;
      if (delta != 0.0) {
        beta[j] = updated;
        q.noalias() += delta * G.col(j);
        max_delta = std::max(max_delta, std::abs(delta));
      }
    }
    return max_delta;
  };

  for (int it = 0; it < opts.max_sweeps; ++it) {
    // Full pass, then cheap passes over the active set until it stabilizes.
    if (sweep(false) < opts.tol) break;
    for (int inner = 0; inner < opts.max_sweeps; ++inner)
      if (sweep(true) < opts.tol) break;
  }
  return beta;
}

/// Convenience wrapper building the Gram form from (X, y).
inline Vector cd_lasso(const Matrix& X, const Vector& y, double lambda,
                       const LassoOptions& opts = {}) {
  if (X.rows() != y.size())
    throw std::invalid_argument("cd_lasso: X rows != y length");
  const double n = static_cast<double>(X.rows());
  const Matrix G = (X.transpose() * X) / n;
  const Vector c = (X.transpose() * y) / n;
  return cd_lasso_gram(G, c, lambda, opts);
}

}  // namespace cofu
