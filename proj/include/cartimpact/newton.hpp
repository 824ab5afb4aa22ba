#pragma once

// Damped Newton for small fixed-size systems G(x) = 0 with a central
// finite-difference Jacobian.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>

#include "cartimpact/error.hpp"

namespace cartimpact {

struct NewtonOptions {
  double tol = 1e-9;  ///< on the infinity norm of G
  std::size_t max_iterations = 50;
  double fd_step = 1e-6;  ///< relative to max(1, |x_i|)
  std::size_t max_halvings = 8;
  double condition_limit = 1e12;
};

template <std::size_t N>
struct NewtonResult {
  std::array<double, N> x{};
  std::array<double, N> residual{};
  double residual_norm = 0.0;
  std::size_t iterations = 0;  ///< passes through the loop, including the converged one
};

namespace detail {

template <std::size_t N>
using SquareN = std::array<std::array<double, N>, N>;

template <std::size_t N>
double norm_inf(const std::array<double, N>& v) {
  double best = 0.0;
  for (double e : v) best = std::max(best, std::abs(e));
  return best;
}

template <std::size_t N>
double norm_one(const SquareN<N>& a) {
  double best = 0.0;
  for (std::size_t j = 0; j < N; ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < N; ++i) col += std::abs(a[i][j]);
    best = std::max(best, col);
  }
  return best;
}

// Gauss-Jordan inverse with partial pivoting; false when singular.
template <std::size_t N>
bool invert(SquareN<N> a, SquareN<N>& inv) {
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) inv[i][j] = i == j ? 1.0 : 0.0;
  for (std::size_t col = 0; col < N; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < N; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (a[piv][col] == 0.0) return false;
    std::swap(a[piv], a[col]);
    std::swap(inv[piv], inv[col]);
    const double d = a[col][col];
    for (std::size_t c = 0; c < N; ++c) {
      a[col][c] /= d;
      inv[col][c] /= d;
    }
    for (std::size_t r = 0; r < N; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      for (std::size_t c = 0; c < N; ++c) {
        a[r][c] -= f * a[col][c];
        inv[r][c] -= f * inv[col][c];
      }
    }
  }
  return true;
}

}  // namespace detail

/// Damped Newton: full step when ||G|| decreases, otherwise halve up to
/// max_halvings times. Trial points where g throws are treated as
/// non-decreasing. Throws SingularJacobian when the 1-norm condition
/// estimate exceeds condition_limit and NoConvergence after max_iterations.
template <std::size_t N, class G>
NewtonResult<N> damped_newton(G&& g, const std::array<double, N>& guess,
                              const NewtonOptions& opts = {}) {
  using V = std::array<double, N>;
  NewtonResult<N> res;
  res.x = guess;
  V r = g(res.x);
  double rn = detail::norm_inf(r);

  for (std::size_t it = 1; it <= opts.max_iterations; ++it) {
    res.iterations = it;
    if (rn <= opts.tol) {
      res.residual = r;
      res.residual_norm = rn;
      return res;
    }

    detail::SquareN<N> jac{};
    for (std::size_t j = 0; j < N; ++j) {
      V xp = res.x;
      V xm = res.x;
      const double h = opts.fd_step * std::max(1.0, std::abs(res.x[j]));
      xp[j] += h;
      xm[j] -= h;
      const V gp = g(xp);
      const V gm = g(xm);
      for (std::size_t i = 0; i < N; ++i) jac[i][j] = (gp[i] - gm[i]) / (2.0 * h);
    }
    detail::SquareN<N> inv{};
    if (!detail::invert<N>(jac, inv))
      throw Error(ErrorCode::SingularJacobian, "finite-difference Jacobian is singular");
    const double cond = detail::norm_one<N>(jac) * detail::norm_one<N>(inv);
    if (!(cond <= opts.condition_limit))
      throw Error(ErrorCode::SingularJacobian,
                  "finite-difference Jacobian condition estimate " + std::to_string(cond));

    V step{};
    for (std::size_t i = 0; i < N; ++i) {
      double acc = 0.0;
      for (std::size_t k = 0; k < N; ++k) acc -= inv[i][k] * r[k];
      step[i] = acc;
    }

    auto try_point = [&](double lambda, V& x_out, V& r_out) {
      for (std::size_t i = 0; i < N; ++i) x_out[i] = res.x[i] + lambda * step[i];
      try {
        r_out = g(x_out);
        return detail::norm_inf(r_out);
      } catch (const Error&) {
        return std::numeric_limits<double>::infinity();
      }
    };

    double lambda = 1.0;
    V x_trial{};
    V r_trial{};
    double rn_trial = try_point(lambda, x_trial, r_trial);
    for (std::size_t k = 0; k < opts.max_halvings && !(rn_trial < rn); ++k) {
      lambda *= 0.5;
      rn_trial = try_point(lambda, x_trial, r_trial);
    }
    if (!std::isfinite(rn_trial))
      throw Error(ErrorCode::NoConvergence, "every damped Newton trial point failed");
    res.x = x_trial;
    r = r_trial;
    rn = rn_trial;
  }
  if (rn <= opts.tol) {
    res.residual = r;
    res.residual_norm = rn;
    return res;
  }
  throw Error(ErrorCode::NoConvergence, "Newton did not converge in " +
                                            std::to_string(opts.max_iterations) + " iterations");
}

}  // namespace cartimpact
