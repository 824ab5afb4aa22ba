#include "cartimpact/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cartimpact/error.hpp"

namespace cartimpact {

Mat4 saltation(const State& pre, const State& post, const Guard& guard,
               const Mat4& reset_jacobian, const Params& p) {
  const Vec4 dh = guard_gradient(guard);
  const Vec4 f_pre = vector_field(pre, p);
  const Vec4 f_post = vector_field(post, p);
  const double rate = dot(dh, f_pre);
  if (std::abs(rate) <= 1e-12)
    throw Error(ErrorCode::NonTransversal, "saltation at a grazing impact");
  const Mat4 projector = Mat4::identity() - (1.0 / rate) * outer(f_pre, dh);
  return reset_jacobian * projector + (1.0 / rate) * outer(f_post, dh);
}

namespace {

using Augmented = std::array<double, 20>;

Augmented augmented_field(const Augmented& y, const Params& p) {
  const State s{y[0], y[1], y[2], y[3]};
  const Vec4 f = vector_field(s, p);
  const Mat4 a = flow_jacobian(s, p);
  Augmented out{};
  for (std::size_t i = 0; i < 4; ++i) out[i] = f[i];
  // d/dt Phi = A Phi, Phi stored row-major after the state.
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < 4; ++k) acc += a(i, k) * y[4 + k * 4 + j];
      out[4 + i * 4 + j] = acc;
    }
  }
  return out;
}

}  // namespace

std::pair<State, Mat4> variational_flow(const State& s0, double t0, double t1,
                                        const IntegratorConfig& cfg, const Params& p) {
  if (t1 < t0) throw Error(ErrorCode::InvalidArgument, "variational_flow needs t1 >= t0");
  Augmented y{};
  y[0] = s0.theta;
  y[1] = s0.x;
  y[2] = s0.p_theta;
  y[3] = s0.p_x;
  for (std::size_t i = 0; i < 4; ++i) y[4 + i * 4 + i] = 1.0;

  auto field = [&p](const Augmented& v) { return augmented_field(v, p); };
  for (std::size_t k = 0;; ++k) {
    const double t_k = t0 + static_cast<double>(k) * cfg.dt;
    const double remaining = t1 - t_k;
    if (remaining <= 1e-12 * cfg.dt) break;
    y = rk4(field, y, std::min(remaining, cfg.dt));
    if (!std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); }))
      throw Error(ErrorCode::Diverged, "non-finite value in variational flow");
  }

  Mat4 phi;
  std::copy(y.begin() + 4, y.end(), phi.a.begin());
  return {State{y[0], y[1], y[2], y[3]}, phi};
}

MonodromyReport monodromy(const HybridTrajectory& traj, const IntegratorConfig& cfg,
                          const Params& p, const MonodromyOptions& opts) {
  MonodromyReport rep;
  const Vec4 a = traj.initial.as_vec();
  const Vec4 b = traj.final_state.as_vec();
  for (std::size_t i = 0; i < 4; ++i) rep.closure_error = std::max(rep.closure_error, std::abs(b[i] - a[i]));
  rep.period = traj.t_final - traj.t0;
  if (!(rep.closure_error <= opts.closure_tol))
    throw Error(ErrorCode::NotClosed, "trajectory does not close: max deviation " +
                                          std::to_string(rep.closure_error));

  Mat4 m = Mat4::identity();
  State cur = traj.initial;
  double t = traj.t0;
  for (const ImpactRecord& imp : traj.impacts) {
    const auto [pre, phi] = variational_flow(cur, t, imp.time, cfg, p);
    (void)pre;
    m = phi * m;
    m = saltation(imp.pre, imp.post, imp.guard, reset_jacobian(imp.law, imp.pre, p), p) * m;
    cur = imp.post;
    t = imp.time;
  }
  m = variational_flow(cur, t, traj.t_final, cfg, p).second * m;

  rep.monodromy = m;
  rep.multipliers = eigenvalues(m);
  rep.spectral_radius = rep.multipliers[0].modulus;
  rep.determinant = determinant(m);

  // Drop the multiplier closest to 1 (flow direction).
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < 4; ++i) {
    const double d = std::hypot(rep.multipliers[i].re - 1.0, rep.multipliers[i].im);
    if (d < best) {
      best = d;
      rep.trivial_index = i;
    }
  }
  rep.spectral_radius_excl_trivial = 0.0;
  for (std::size_t i = 0; i < 4; ++i)
    if (i != rep.trivial_index)
      rep.spectral_radius_excl_trivial = std::max(rep.spectral_radius_excl_trivial, rep.multipliers[i].modulus);
  rep.stable = rep.spectral_radius_excl_trivial < 1.0 - opts.margin;
  return rep;
}

Mat4 time_map_jacobian_fd(const HybridTrajectory& traj, std::span<const GuardedReset> guards,
                          const IntegratorConfig& cfg, const Params& p, double step) {
  IntegratorConfig c = cfg;
  c.t_max = traj.t_final - traj.t0;
  RunOptions opts;
  opts.t0 = traj.t0;
  opts.record_samples = false;

  Mat4 j;
  for (std::size_t col = 0; col < 4; ++col) {
    Vec4 plus = traj.initial.as_vec();
    Vec4 minus = plus;
    const double h = step * std::max(1.0, std::abs(plus[col]));
    plus[col] += h;
    minus[col] -= h;
    const HybridTrajectory tp = run_hybrid(State::from_vec(plus), guards, c, p, opts);
    const HybridTrajectory tm = run_hybrid(State::from_vec(minus), guards, c, p, opts);
    if (tp.termination != Termination::HorizonReached || tm.termination != Termination::HorizonReached ||
        tp.impacts.size() != traj.impacts.size() || tm.impacts.size() != traj.impacts.size())
      throw Error(ErrorCode::NoReturn, "perturbed trajectory changed its impact sequence");
    const Vec4 fp = tp.final_state.as_vec();
    const Vec4 fm = tm.final_state.as_vec();
    for (std::size_t row = 0; row < 4; ++row) j(row, col) = (fp[row] - fm[row]) / (2.0 * h);
  }
  return j;
}

}  // namespace cartimpact
