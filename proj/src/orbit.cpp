#include "cartimpact/orbit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cartimpact/error.hpp"

namespace cartimpact {

State embed(const SectionState& s, double x_star) { return {s.theta, x_star, s.p_theta, s.p_x}; }

SectionState restrict_to_section(const State& s) { return {s.theta, s.p_theta, s.p_x}; }

double max_abs_diff(const SectionState& a, const SectionState& b) {
  return std::max({std::abs(a.theta - b.theta), std::abs(a.p_theta - b.p_theta), std::abs(a.p_x - b.p_x)});
}

std::vector<GuardedReset> WallSystem::guards() const {
  return {
      {{GuardKind::ExteriorWall, x_star, CrossingDirection::Increasing}, right},
      {{GuardKind::ExteriorWall, -x_star, CrossingDirection::Decreasing}, left},
  };
}

void WallSystem::validate() const {
  if (!(x_star > 0.0) || !std::isfinite(x_star))
    throw Error(ErrorCode::InvalidArgument, "wall position x_star must be positive");
  if (period_impacts < 1) throw Error(ErrorCode::InvalidArgument, "period_impacts must be >= 1");
  right.validate();
  left.validate();
}

WallSystem nominal_walls(double x_star, double right_post_p_x) {
  WallSystem w;
  w.x_star = x_star;
  w.right = ResetLaw::feedback({}, {}, right_post_p_x);
  w.left = ResetLaw::feedback({}, {}, -right_post_p_x);
  return w;
}

namespace {

RunOptions after_section_impact(std::size_t stop_after) {
  RunOptions opts;
  opts.t0 = 0.0;
  opts.stop_after_impacts = stop_after;
  opts.record_samples = false;
  opts.last_impact_time = 0.0;
  opts.just_fired = 0;
  return opts;
}

void require_clean(const HybridTrajectory& traj, const char* what) {
  switch (traj.termination) {
    case Termination::Diverged:
      throw Error(ErrorCode::Diverged, std::string(what) + ": " + traj.message);
    case Termination::ZenoGuardTripped:
      throw Error(ErrorCode::ZenoGuardTripped, std::string(what) + ": " + traj.message);
    default:
      break;
  }
}

}  // namespace

ReturnResult return_map(const SectionState& s, const WallSystem& walls, const IntegratorConfig& cfg,
                        const Params& p) {
  const auto guards = walls.guards();
  const State post = apply_reset(walls.right, embed(s, walls.x_star), p);
  const HybridTrajectory traj =
      run_hybrid(post, guards, cfg, p, after_section_impact(walls.period_impacts));
  require_clean(traj, "return map");
  if (traj.termination != Termination::GuardSetExhausted)
    throw Error(ErrorCode::NoReturn, "no return to the section within t_max");
  const ImpactRecord& last = traj.impacts.back();
  if (last.guard_index != 0)
    throw Error(ErrorCode::NoReturn, "impact sequence did not end on the section wall");
  return {restrict_to_section(last.pre), last.time};
}

OrbitSpec find_periodic_orbit(const SectionState& guess, const WallSystem& walls,
                              const IntegratorConfig& cfg, const Params& p,
                              const NewtonOptions& opts) {
  walls.validate();
  auto residual = [&](const std::array<double, 3>& v) {
    const SectionState s{v[0], v[1], v[2]};
    const SectionState r = return_map(s, walls, cfg, p).next;
    return std::array<double, 3>{r.theta - s.theta, r.p_theta - s.p_theta, r.p_x - s.p_x};
  };
  NewtonResult<3> res;
  try {
    res = damped_newton<3>(residual, {guess.theta, guess.p_theta, guess.p_x}, opts);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NoConvergence || e.code() == ErrorCode::SingularJacobian) throw;
    throw Error(ErrorCode::NoConvergence, std::string("return map failed during the search: ") + e.what());
  }

  OrbitSpec orbit;
  orbit.walls = walls;
  orbit.fixed_point = {res.x[0], res.x[1], res.x[2]};
  orbit.period = return_map(orbit.fixed_point, walls, cfg, p).time;
  orbit.newton_iterations = res.iterations;
  orbit.residual = res.residual_norm;
  return orbit;
}

std::vector<ImpactRecord> orbit_impacts(const OrbitSpec& orbit, const IntegratorConfig& cfg,
                                        const Params& p) {
  const WallSystem& w = orbit.walls;
  const State pre = embed(orbit.fixed_point, w.x_star);
  const State post = apply_reset(w.right, pre, p);
  std::vector<ImpactRecord> out;
  out.push_back(make_impact_record(0.0, pre, post, w.guards()[0].guard, w.right, 0, p));
  if (w.period_impacts > 1) {
    const HybridTrajectory traj =
        run_hybrid(post, w.guards(), cfg, p, after_section_impact(w.period_impacts - 1));
    require_clean(traj, "orbit impacts");
    if (traj.termination != Termination::GuardSetExhausted)
      throw Error(ErrorCode::NoReturn, "orbit lost its impact sequence");
    out.insert(out.end(), traj.impacts.begin(), traj.impacts.end());
  }
  return out;
}

HybridTrajectory periodic_trajectory(const OrbitSpec& orbit, const IntegratorConfig& cfg,
                                     const Params& p, bool record_samples) {
  const WallSystem& w = orbit.walls;
  const auto guards = w.guards();
  const State post = apply_reset(w.right, embed(orbit.fixed_point, w.x_star), p);

  // Base point: halfway to the first impact after the section.
  const HybridTrajectory first = run_hybrid(post, guards, cfg, p, after_section_impact(1));
  require_clean(first, "periodic trajectory");
  if (first.termination != Termination::GuardSetExhausted)
    throw Error(ErrorCode::NoReturn, "orbit never leaves the section wall");
  IntegratorConfig half = cfg;
  half.t_max = 0.5 * first.impacts.front().time;
  RunOptions free_flight;
  free_flight.record_samples = false;
  const State base = run_hybrid(post, {}, half, p, free_flight).final_state;

  IntegratorConfig full = cfg;
  full.t_max = orbit.period;
  RunOptions opts;
  opts.record_samples = record_samples;
  HybridTrajectory traj = run_hybrid(base, guards, full, p, opts);
  require_clean(traj, "periodic trajectory");
  if (traj.impacts.size() != w.period_impacts)
    throw Error(ErrorCode::NotClosed, "periodic trajectory has " + std::to_string(traj.impacts.size()) +
                                          " impacts, expected " + std::to_string(w.period_impacts));
  return traj;
}

MonodromyReport analyze_orbit(const OrbitSpec& orbit, const IntegratorConfig& cfg, const Params& p,
                              const MonodromyOptions& opts) {
  return monodromy(periodic_trajectory(orbit, cfg, p), cfg, p, opts);
}

WallSystem feedback_walls(const OrbitSpec& orbit, const FeedbackGains& gains,
                          const IntegratorConfig& cfg, const Params& p) {
  const auto impacts = orbit_impacts(orbit, cfg, p);
  WallSystem w = orbit.walls;
  std::array<bool, 2> seen{false, false};
  for (const ImpactRecord& imp : impacts) {
    if (seen[imp.guard_index]) continue;
    seen[imp.guard_index] = true;
    const ReferencePoint ref{imp.pre.theta, imp.pre.p_theta, imp.pre.p_x};
    ResetLaw law = ResetLaw::feedback(gains, ref, imp.post.p_x);
    (imp.guard_index == 0 ? w.right : w.left) = law;
  }
  if (!seen[0] || !seen[1])
    throw Error(ErrorCode::InvalidArgument, "orbit does not visit both walls");
  return w;
}

}  // namespace cartimpact
