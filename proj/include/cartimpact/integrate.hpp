#pragma once

// Fixed-step RK4 with bisection event localization and the hybrid executor.

#include <array>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cartimpact/hybrid.hpp"
#include "cartimpact/model.hpp"

namespace cartimpact {

struct IntegratorConfig {
  double dt = 1e-3;                      ///< base step [s]
  double event_tol = 1e-12;              ///< event time bracket width [s]
  std::size_t max_impacts = 100000;      ///< Zeno guard
  double t_max = 10.0;                   ///< horizon measured from the start time [s]
  std::optional<double> min_separation;  ///< minimum time between impacts; defaults to dt

  double min_separation_or_default() const { return min_separation.value_or(dt); }
  void validate() const;
};

/// Classical RK4 step of y' = f(y) for any fixed-size state.
template <std::size_t N, class F>
std::array<double, N> rk4(F&& f, const std::array<double, N>& y, double h) {
  using V = std::array<double, N>;
  auto axpy = [](const V& base, double a, const V& k) {
    V out;
    for (std::size_t i = 0; i < N; ++i) out[i] = base[i] + a * k[i];
    return out;
  };
  const V k1 = f(y);
  const V k2 = f(axpy(y, 0.5 * h, k1));
  const V k3 = f(axpy(y, 0.5 * h, k2));
  const V k4 = f(axpy(y, h, k3));
  V out;
  for (std::size_t i = 0; i < N; ++i)
    out[i] = y[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

/// One RK4 step of vector_field. Throws Diverged on a non-finite result.
State rk4_step(const State& s, double dt, const Params& p);

/// True when h0 -> h1 is an admissible crossing of the guard in its declared
/// direction. Interior guards also reject the branch-cut jump of the wrapped
/// angle.
bool is_crossing(const Guard& guard, double h0, double h1);

struct EventHit {
  double t = 0.0;
  State state;
};

/// Localize the guard crossing inside the RK4 step [t_before, t_before + dt]
/// by bisection down to event_tol followed by one secant refinement.
/// Throws NoSignChange if the step does not cross the guard and
/// NonTransversal if |dh . f| < 1e-12 at the hit.
EventHit locate_event(const State& s_before, double t_before, double dt, const Guard& guard,
                      const Params& p, double event_tol);

struct GuardedReset {
  Guard guard;
  ResetLaw law;
};

enum class Termination { HorizonReached, ZenoGuardTripped, Diverged, GuardSetExhausted };
std::string_view to_string(Termination t);

struct Sample {
  double t = 0.0;
  State state;
};

struct Arc {
  double t_start = 0.0;
  double t_end = 0.0;
  State start;
  State end;
  std::vector<Sample> samples;  ///< empty unless RunOptions::record_samples
};

struct HybridTrajectory {
  double t0 = 0.0;
  State initial;
  double t_final = 0.0;
  State final_state;
  std::vector<Arc> arcs;
  std::vector<ImpactRecord> impacts;
  Termination termination = Termination::HorizonReached;
  std::string message;
};

struct RunOptions {
  double t0 = 0.0;
  /// Stop right after this many impacts (0 = never). Termination is then
  /// GuardSetExhausted.
  std::size_t stop_after_impacts = 0;
  bool record_samples = true;
  std::size_t sample_stride = 1;
  /// Time of an impact that happened just before t0, for min_separation.
  double last_impact_time = -std::numeric_limits<double>::infinity();
  /// Guard that fired at t0; skipped for the first step if its direction is Either.
  std::optional<std::size_t> just_fired;
};

/// Alternate RK4 arcs and resets. On each step the earliest admissible
/// crossing wins; two crossings within event_tol of each other throw
/// SimultaneousImpact. Localization failures (NonTransversal) propagate.
HybridTrajectory run_hybrid(const State& s0, std::span<const GuardedReset> guards,
                            const IntegratorConfig& cfg, const Params& p,
                            const RunOptions& opts = {});

}  // namespace cartimpact
