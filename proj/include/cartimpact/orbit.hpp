#pragma once

// Periodic two-wall orbits as fixed points of the impact-to-impact return map.
//
// The section is the right wall x = +x_star, sampled just before impact.
// One period is: right reset, flight, left impact, flight, right impact.

#include <cstddef>
#include <vector>

#include "cartimpact/floquet.hpp"
#include "cartimpact/hybrid.hpp"
#include "cartimpact/integrate.hpp"
#include "cartimpact/newton.hpp"

namespace cartimpact {

/// Pre-impact state on the section wall; x is implied by the wall.
struct SectionState {
  double theta = 0.0;
  double p_theta = 0.0;
  double p_x = 0.0;

  bool operator==(const SectionState&) const = default;
};

State embed(const SectionState& s, double x_star);
SectionState restrict_to_section(const State& s);
double max_abs_diff(const SectionState& a, const SectionState& b);

/// Walls at +-x_star with one reset law each. Guard 0 is the right wall
/// (crossed increasing), guard 1 the left wall (crossed decreasing).
struct WallSystem {
  double x_star = 0.5;
  ResetLaw right = ResetLaw::exterior_elastic();
  ResetLaw left = ResetLaw::exterior_elastic();
  std::size_t period_impacts = 2;

  double wall_gap() const { return 2.0 * x_star; }
  std::vector<GuardedReset> guards() const;
  void validate() const;
};

/// Open-loop walls that impose a fixed post-impact momentum: p_x+ = right_post_p_x
/// at the right wall and -right_post_p_x at the left wall (zero-gain feedback).
WallSystem nominal_walls(double x_star, double right_post_p_x);

struct OrbitSpec {
  WallSystem walls;
  SectionState fixed_point;
  double period = 0.0;
  std::size_t newton_iterations = 0;
  double residual = 0.0;
};

struct ReturnResult {
  SectionState next;
  double time = 0.0;
};

/// Apply the right-wall reset to the embedded state, flow until
/// period_impacts impacts have occurred, and return the pre-impact section
/// state of the last one. Throws NoReturn if the horizon cfg.t_max runs out
/// or the last impact is not on the section wall.
ReturnResult return_map(const SectionState& s, const WallSystem& walls, const IntegratorConfig& cfg,
                        const Params& p);

/// Damped Newton on G(s) = return_map(s) - s. Throws NoConvergence or
/// SingularJacobian; a return-map failure at an accepted point (the guess or an
/// FD stencil) becomes NoConvergence carrying the original message.
OrbitSpec find_periodic_orbit(const SectionState& guess, const WallSystem& walls,
                              const IntegratorConfig& cfg, const Params& p,
                              const NewtonOptions& opts = {});

/// One period of the orbit starting mid-way through the first flight (so
/// the time-T map is smooth at the base point). Termination must be
/// HorizonReached with exactly period_impacts impacts.
HybridTrajectory periodic_trajectory(const OrbitSpec& orbit, const IntegratorConfig& cfg,
                                     const Params& p, bool record_samples = false);

/// Pre/post states of each impact along one period, starting with the right wall.
std::vector<ImpactRecord> orbit_impacts(const OrbitSpec& orbit, const IntegratorConfig& cfg,
                                        const Params& p);

/// Monodromy of the orbit built from periodic_trajectory.
MonodromyReport analyze_orbit(const OrbitSpec& orbit, const IntegratorConfig& cfg, const Params& p,
                              const MonodromyOptions& opts = {});

/// Feedback walls around an orbit: reference = the orbit's pre-impact state at
/// each wall, nominal = the orbit's post-impact p_x there, so the orbit stays
/// a fixed point of the closed loop.
WallSystem feedback_walls(const OrbitSpec& orbit, const FeedbackGains& gains,
                          const IntegratorConfig& cfg, const Params& p);

}  // namespace cartimpact
