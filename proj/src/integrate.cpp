#include "cartimpact/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cartimpact/error.hpp"

namespace cartimpact {

void IntegratorConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  if (!(event_tol > 0.0) || !(event_tol < dt))
    throw Error(ErrorCode::InvalidArgument, "event_tol must satisfy 0 < event_tol < dt");
  if (max_impacts < 1) throw Error(ErrorCode::InvalidArgument, "max_impacts must be >= 1");
  if (!(t_max >= 0.0) || !std::isfinite(t_max))
    throw Error(ErrorCode::InvalidArgument, "t_max must be finite and nonnegative");
  if (min_separation && !(*min_separation >= 0.0))
    throw Error(ErrorCode::InvalidArgument, "min_separation must be nonnegative");
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::HorizonReached:
      return "HorizonReached";
    case Termination::ZenoGuardTripped:
      return "ZenoGuardTripped";
    case Termination::Diverged:
      return "Diverged";
    case Termination::GuardSetExhausted:
      return "GuardSetExhausted";
  }
  return "?";
}

State rk4_step(const State& s, double dt, const Params& p) {
  const Vec4 y = rk4([&p](const Vec4& v) { return vector_field(State::from_vec(v), p); },
                     s.as_vec(), dt);
  const State out = State::from_vec(y);
  if (!is_finite(out)) throw Error(ErrorCode::Diverged, "non-finite state after RK4 step");
  return out;
}

bool is_crossing(const Guard& guard, double h0, double h1) {
  if (guard.kind == GuardKind::InteriorAngle) {
    // The wrapped angle jumps by 2pi half a turn away from the wall.
    constexpr double half_pi = 0.5 * std::numbers::pi;
    if (std::abs(h0) > half_pi || std::abs(h1) > half_pi) return false;
  }
  const bool up = h0 <= 0.0 && h1 > 0.0;
  const bool down = h0 >= 0.0 && h1 < 0.0;
  switch (guard.direction) {
    case CrossingDirection::Increasing:
      return up;
    case CrossingDirection::Decreasing:
      return down;
    case CrossingDirection::Either:
      return up || down;
  }
  return false;
}

EventHit locate_event(const State& s_before, double t_before, double dt, const Guard& guard,
                      const Params& p, double event_tol) {
  const double h0 = guard_value(guard, s_before);
  const double h1 = guard_value(guard, rk4_step(s_before, dt, p));
  if (!is_crossing(guard, h0, h1))
    throw Error(ErrorCode::NoSignChange, "step does not cross the guard in its declared direction");

  const bool far_positive = h1 > 0.0;
  auto on_far_side = [far_positive](double h) { return far_positive ? h > 0.0 : h < 0.0; };

  double lo = 0.0, hi = dt;
  double h_lo = h0, h_hi = h1;
  while (hi - lo > event_tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double h_mid = guard_value(guard, rk4_step(s_before, mid, p));
    if (on_far_side(h_mid)) {
      hi = mid;
      h_hi = h_mid;
    } else {
      lo = mid;
      h_lo = h_mid;
    }
  }
  double tau = lo;
  if (h_hi != h_lo) tau = std::clamp(lo - h_lo * (hi - lo) / (h_hi - h_lo), lo, hi);

  EventHit hit{t_before + tau, tau == 0.0 ? s_before : rk4_step(s_before, tau, p)};
  if (std::abs(guard_rate(guard, hit.state, p)) < 1e-12)
    throw Error(ErrorCode::NonTransversal, "grazing contact: dh . f vanishes at the impact");
  return hit;
}

HybridTrajectory run_hybrid(const State& s0, std::span<const GuardedReset> guards,
                            const IntegratorConfig& cfg, const Params& p, const RunOptions& opts) {
  cfg.validate();
  p.validate();
  for (const auto& g : guards) g.law.validate();

  HybridTrajectory traj;
  traj.t0 = opts.t0;
  traj.initial = s0;
  traj.t_final = opts.t0;
  traj.final_state = s0;
  if (!is_finite(s0)) {
    traj.termination = Termination::Diverged;
    traj.message = "non-finite initial state";
    return traj;
  }

  const double t_end = opts.t0 + cfg.t_max;
  const double min_sep = cfg.min_separation_or_default();
  const std::size_t stride = std::max<std::size_t>(1, opts.sample_stride);
  if (cfg.t_max == 0.0) return traj;

  std::vector<double> h_prev(guards.size());
  std::vector<bool> armed(guards.size(), true);
  auto reset_guard_cache = [&](const State& s, std::optional<std::size_t> fired) {
    for (std::size_t i = 0; i < guards.size(); ++i) {
      h_prev[i] = guard_value(guards[i].guard, s);
      armed[i] = !(fired && *fired == i && guards[i].guard.direction == CrossingDirection::Either);
    }
  };

  State s = s0;
  double t_arc = opts.t0;
  double last_impact = opts.last_impact_time;
  std::size_t k = 0;
  reset_guard_cache(s, opts.just_fired);

  auto open_arc = [&](double t, const State& start) {
    Arc arc;
    arc.t_start = t;
    arc.start = start;
    if (opts.record_samples) arc.samples.push_back({t, start});
    traj.arcs.push_back(std::move(arc));
  };
  auto close_arc = [&](double t, const State& end) {
    Arc& arc = traj.arcs.back();
    arc.t_end = t;
    arc.end = end;
    if (opts.record_samples && (arc.samples.empty() || arc.samples.back().t != t))
      arc.samples.push_back({t, end});
  };
  auto finish = [&](Termination why, double t, const State& st, std::string msg = {}) {
    traj.termination = why;
    traj.t_final = t;
    traj.final_state = st;
    traj.message = std::move(msg);
    return traj;
  };

  open_arc(t_arc, s);
  while (true) {
    const double t_k = t_arc + static_cast<double>(k) * cfg.dt;
    const double remaining = t_end - t_k;
    if (remaining <= 1e-12 * cfg.dt) {
      close_arc(t_k, s);
      return finish(Termination::HorizonReached, t_k, s);
    }
    const bool last = remaining <= cfg.dt;
    const double step = last ? remaining : cfg.dt;

    State next;
    try {
      next = rk4_step(s, step, p);
    } catch (const Error& e) {
      close_arc(t_k, s);
      return finish(Termination::Diverged, t_k, s, e.what());
    }

    std::optional<std::size_t> winner;
    EventHit best;
    for (std::size_t i = 0; i < guards.size(); ++i) {
      if (!armed[i]) continue;
      const double h_next = guard_value(guards[i].guard, next);
      if (!is_crossing(guards[i].guard, h_prev[i], h_next)) continue;
      const EventHit hit = locate_event(s, t_k, step, guards[i].guard, p, cfg.event_tol);
      if (winner && std::abs(hit.t - best.t) <= cfg.event_tol)
        throw Error(ErrorCode::SimultaneousImpact, "two guards crossed at the same time");
      if (!winner || hit.t < best.t) {
        winner = i;
        best = hit;
      }
    }

    if (!winner) {
      s = next;
      ++k;
      for (std::size_t i = 0; i < guards.size(); ++i) {
        h_prev[i] = guard_value(guards[i].guard, s);
        armed[i] = true;
      }
      if (opts.record_samples && (k % stride == 0 || last))
        traj.arcs.back().samples.push_back({t_k + step, s});
      if (last) {
        close_arc(t_k + step, s);
        return finish(Termination::HorizonReached, t_k + step, s);
      }
      continue;
    }

    const GuardedReset& gr = guards[*winner];
    close_arc(best.t, best.state);
    if (best.t - last_impact < min_sep)
      return finish(Termination::ZenoGuardTripped, best.t, best.state,
                    "impacts closer than min_separation");
    if (traj.impacts.size() + 1 > cfg.max_impacts)
      return finish(Termination::ZenoGuardTripped, best.t, best.state, "max_impacts exceeded");

    const State post = apply_reset(gr.law, best.state, p);
    traj.impacts.push_back(make_impact_record(best.t, best.state, post, gr.guard, gr.law, *winner, p));
    last_impact = best.t;
    if (!is_finite(post)) return finish(Termination::Diverged, best.t, post, "non-finite reset");
    if (opts.stop_after_impacts != 0 && traj.impacts.size() >= opts.stop_after_impacts)
      return finish(Termination::GuardSetExhausted, best.t, post);

    s = post;
    t_arc = best.t;
    k = 0;
    reset_guard_cache(s, winner);
    open_arc(t_arc, s);
  }
}

}  // namespace cartimpact
