#pragma once

// Elementwise and blockwise operators used by the ADMM updates:
// soft thresholding, group shrinkage, and the adjacent-dataset difference
// operator applied matrix-free to stacked coefficient vectors.
//
// Stacked layout: a p x K panel maps to a vector of length p*K with dataset
// k occupying entries [k*p, (k+1)*p).

#include <cofu/types.hpp>

#include <algorithm>
#include <cmath>

namespace cofu {

/// sign(x) * max(|x| - t, 0); requires t >= 0.
inline double soft_threshold(double x, double t) {
  if (t < 0.0) throw std::invalid_argument("soft_threshold: t must be >= 0");
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

/// Elementwise soft threshold.
inline Vector soft_threshold(const Vector& x, double t) {
  if (t < 0.0) throw std::invalid_argument("soft_threshold: t must be >= 0");
  Vector out(x.size());
  for (Index i = 0; i < x.size(); ++i) out[i] = soft_threshold(x[i], t);
  return out;
}

/// Blockwise shrinkage: 0 when ||v|| <= t, else (1 - t/||v||) v.
inline Vector group_shrink(const Vector& v, double t) {
  if (t < 0.0) throw std::invalid_argument("group_shrink: t must be >= 0");
  const double norm = v.norm();
  if (norm <= t) return Vector::Zero(v.size());
  return (1.0 - t / norm) * v;
}

/// Flattens a p x K panel to a stacked vector (dataset-major).
inline Vector stack_panel(const CoefficientPanel& panel) {
  Vector out(panel.size());
  const Index p = panel.rows();
  for (Index k = 0; k < panel.cols(); ++k) out.segment(k * p, p) = panel.col(k);
  return out;
}

/// Reshapes a stacked vector of length p*K back into a p x K panel.
inline CoefficientPanel unstack_panel(const Vector& stacked, Index p, int K) {
  if (stacked.size() != p * K)
    throw std::invalid_argument("unstack_panel: size mismatch");
  CoefficientPanel panel(p, K);
  for (int k = 0; k < K; ++k) panel.col(k) = stacked.segment(k * p, p);
  return panel;
}

/// Applies the adjacent-difference operator: block k of the result is
/// beta_k - beta_{k+1}.  K = 1 yields an empty vector.
inline Vector difference_apply(const Vector& beta, Index p, int K) {
  if (beta.size() != p * K)
    throw std::invalid_argument("difference_apply: size mismatch");
  Vector out(p * (K - 1));
  for (int k = 0; k + 1 < K; ++k)
    out.segment(k * p, p) = beta.segment(k * p, p) - beta.segment((k + 1) * p, p);
  return out;
}

/// Transpose of difference_apply: block k of the result is eta_k - eta_{k-1}
/// with out-of-range blocks treated as zero.
inline Vector difference_apply_transpose(const Vector& eta, Index p, int K) {
  if (eta.size() != p * (K - 1))
    throw std::invalid_argument("difference_apply_transpose: size mismatch");
  Vector out = Vector::Zero(p * K);
  for (int k = 0; k + 1 < K; ++k) {
    out.segment(k * p, p) += eta.segment(k * p, p);
    out.segment((k + 1) * p, p) -= eta.segment(k * p, p);
  }
  return out;
}

}  // namespace cofu
