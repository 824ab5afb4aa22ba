#pragma once

// Linearized hybrid flow: variational equations between impacts, saltation
// matrices across them, and the monodromy of a closed hybrid orbit.

#include <array>
#include <span>
#include <utility>

#include "cartimpact/hybrid.hpp"
#include "cartimpact/integrate.hpp"
#include "cartimpact/linalg.hpp"
#include "cartimpact/model.hpp"

namespace cartimpact {

/// Hybrid Jacobian across one impact,
///   Xi = DDelta (I - f- dh / (dh f-)) + f+ dh / (dh f-).
/// Throws NonTransversal when |dh f-| <= 1e-12.
Mat4 saltation(const State& pre, const State& post, const Guard& guard,
               const Mat4& reset_jacobian, const Params& p);

/// Co-integrate the state and the fundamental matrix (Phi(t0) = I) over
/// [t0, t1] with the same RK4 step grid run_hybrid uses. The interval must not
/// contain an impact. Throws Diverged on non-finite values.
std::pair<State, Mat4> variational_flow(const State& s0, double t0, double t1,
                                        const IntegratorConfig& cfg, const Params& p);

struct MonodromyOptions {
  double closure_tol = 1e-8;  ///< per component, final vs initial state
  double margin = 1e-9;       ///< stable iff retained moduli < 1 - margin
};

struct MonodromyReport {
  Mat4 monodromy;
  std::array<ComplexEig, 4> multipliers{};
  double spectral_radius = 0.0;               ///< raw maximum modulus
  double spectral_radius_excl_trivial = 0.0;  ///< after dropping the multiplier closest to 1
  std::size_t trivial_index = 0;              ///< index into multipliers of the dropped one
  double determinant = 0.0;
  double closure_error = 0.0;
  double period = 0.0;
  bool stable = false;
};

/// M = Phi_n Xi_n ... Xi_1 Phi_0 along a trajectory covering exactly one
/// period. Throws NotClosed if |final - initial| exceeds closure_tol in any
/// component; propagates NonTransversal and NoConvergence.
MonodromyReport monodromy(const HybridTrajectory& period_trajectory, const IntegratorConfig& cfg,
                          const Params& p, const MonodromyOptions& opts = {});

/// Central finite-difference Jacobian of the time-T hybrid flow map starting
/// at the trajectory's initial state, T = t_final - t0. Independent of the
/// variational/saltation machinery; used to cross-check monodromy().
Mat4 time_map_jacobian_fd(const HybridTrajectory& period_trajectory,
                          std::span<const GuardedReset> guards, const IntegratorConfig& cfg,
                          const Params& p, double step = 1e-6);

}  // namespace cartimpact
