#pragma once

// Limited-memory BFGS with a strong-Wolfe line search, used for the smooth
// quadratic-penalized subproblem inside the logistic-model ADMM iteration.

#include <cofu/types.hpp>

#include <cmath>
#include <deque>
#include <vector>

namespace cofu {

struct LbfgsOptions {
  int memory = 10;
  int max_iter = 200;
  double grad_tol = 1e-6;  ///< stop when ||g|| < grad_tol * (1 + ||g at start||)
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;
  int max_line_search = 60;
};

struct LbfgsResult {
  Vector x;
  double fx = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Minimizes fg, a callable double(const Vector& x, Vector& grad).
template <typename F>
LbfgsResult lbfgs_minimize(F&& fg, const Vector& x0,
                           const LbfgsOptions& opts = {}) {
  const Index n = x0.size();
  Vector x = x0;
  Vector g(n);
  double fx = fg(x, g);
  const double gtol = opts.grad_tol * (1.0 + g.norm());

  std::deque<Vector> s_hist, y_hist;
  std::deque<double> rho_hist;

  LbfgsResult res;
  res.x = x;
  res.fx = fx;
  res.grad_norm = g.norm();
  if (res.grad_norm < gtol) {
    res.converged = true;
    return res;
  }

  Vector d(n), x_try(n), g_try(n), g_best(n);
  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    // Two-loop recursion for d = -H g.
    d = -g;
    const int m = static_cast<int>(s_hist.size());
    std::vector<double> alpha(static_cast<std::size_t>(m));
    for (int i = m - 1; i >= 0; --i) {
      alpha[static_cast<std::size_t>(i)] = rho_hist[i] * s_hist[i].dot(d);
      d -= alpha[static_cast<std::size_t>(i)] * y_hist[i];
    }
    if (m > 0)
      d *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (int i = 0; i < m; ++i) {
      const double b = rho_hist[i] * y_hist[i].dot(d);
      d += (alpha[static_cast<std::size_t>(i)] - b) * s_hist[i];
    }

    double dg0 = g.dot(d);
    if (dg0 >= 0.0) {  // not a descent direction; fall back to steepest descent
      d = -g;
      dg0 = -g.squaredNorm();
    }

    // Strong-Wolfe search: expand until bracketed, then bisect.
    const double f0 = fx;
    double step = 1.0;
    double lo = 0.0, hi = -1.0;  // hi < 0 means not yet bracketed
    double f_lo = f0;
    double f_best = f0, step_best = 0.0;
    bool wolfe_ok = false;
    for (int ls = 0; ls < opts.max_line_search; ++ls) {
      x_try = x + step * d;
      const double f_try = fg(x_try, g_try);
      if (f_try < f_best) {
        f_best = f_try;
        step_best = step;
        g_best = g_try;
      }
      const double dg_try = g_try.dot(d);
      if (f_try > f0 + opts.wolfe_c1 * step * dg0 ||
          (ls > 0 && hi < 0.0 && f_try >= f_lo)) {
        hi = step;
      } else if (std::abs(dg_try) <= -opts.wolfe_c2 * dg0) {
        wolfe_ok = true;
        step_best = step;
        f_best = f_try;
        g_best = g_try;
        break;
      } else if (dg_try >= 0.0) {
        hi = lo;
        lo = step;
        f_lo = f_try;
      } else {
        lo = step;
        f_lo = f_try;
      }
      step = hi < 0.0 ? step * 2.0 : 0.5 * (lo + hi);
      if (step <= 0.0 || !std::isfinite(step)) break;
    }
    if (!wolfe_ok && step_best == 0.0) break;  // no decrease found

    x_try = x + step_best * d;
    const Vector s = x_try - x;
    const Vector yv = g_best - g;
    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(yv);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opts.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }

    x = x_try;
    g = g_best;
    fx = f_best;
    res.iterations = iter;
    res.grad_norm = g.norm();
    if (res.grad_norm < gtol) {
      res.converged = true;
      break;
    }
  }
  res.x = x;
  res.fx = fx;
  return res;
}

}  // namespace cofu
