#pragma once

// Impact surfaces and reset maps of the cart-pendulum.
//
// Two guard families: interior guards live on the shape circle
// (theta = wall angle mod 2pi) and exterior guards on the fiber (x = level).
// Every reset is momentum-only; (theta, x) pass through unchanged.

#include <array>
#include <string_view>

#include "cartimpact/linalg.hpp"
#include "cartimpact/model.hpp"

namespace cartimpact {

enum class GuardKind { InteriorAngle, ExteriorWall };
enum class CrossingDirection { Increasing, Decreasing, Either };

struct Guard {
  GuardKind kind = GuardKind::ExteriorWall;
  double level = 0.0;  ///< wall angle [rad] (interior) or wall position [m] (exterior)
  CrossingDirection direction = CrossingDirection::Either;

  bool operator==(const Guard&) const = default;
};

/// h(s): wrap(theta - level) into (-pi, pi] for interior guards, x - level for
/// exterior guards.
double guard_value(const Guard& guard, const State& s);

/// Constant covector dh (guards are coordinate level sets).
Vec4 guard_gradient(const Guard& guard);

/// dh . f at s.
double guard_rate(const Guard& guard, const State& s, const Params& p);

enum class ResetKind { InteriorElastic, ExteriorElastic, ControlledWall, FeedbackWall };

struct FeedbackGains {
  double kappa_theta = 0.0;
  double kappa_p_theta = 0.0;
  double kappa_p_x = 0.0;

  bool operator==(const FeedbackGains&) const = default;
};

/// Point on the reference orbit seen by a feedback reset (pre-impact values).
struct ReferencePoint {
  double theta = 0.0;
  double p_theta = 0.0;
  double p_x = 0.0;

  bool operator==(const ReferencePoint&) const = default;
};

struct ResetLaw {
  ResetKind kind = ResetKind::ExteriorElastic;
  double wall_velocity = 0.0;  ///< ControlledWall only
  FeedbackGains gains;         ///< FeedbackWall only
  ReferencePoint reference;    ///< FeedbackWall only
  double nominal_p_x = 0.0;    ///< nominal post-impact p_x, FeedbackWall only

  static ResetLaw interior_elastic() { return {ResetKind::InteriorElastic, 0.0, {}, {}, 0.0}; }
  static ResetLaw exterior_elastic() { return {ResetKind::ExteriorElastic, 0.0, {}, {}, 0.0}; }
  static ResetLaw controlled(double v) { return {ResetKind::ControlledWall, v, {}, {}, 0.0}; }
  static ResetLaw feedback(const FeedbackGains& gains, const ReferencePoint& ref, double nominal_p_x) {
    return {ResetKind::FeedbackWall, 0.0, gains, ref, nominal_p_x};
  }

  /// Throws InvalidArgument on non-finite parameters.
  void validate() const;

  bool operator==(const ResetLaw&) const = default;
};

std::string_view to_string(GuardKind kind);
std::string_view to_string(CrossingDirection direction);
std::string_view to_string(ResetKind kind);

struct ImpactRecord {
  double time = 0.0;
  State pre;
  State post;
  double impulse = 0.0;      ///< p_x+ - p_x-
  double energy_jump = 0.0;  ///< H- - H+
  Guard guard;
  ResetLaw law;
  std::size_t guard_index = 0;
};

/// p_theta+ = -p_theta- + (2 m ell / (M+m)) cos(theta) p_x-,  p_x+ = p_x-.
State interior_reset(const State& pre, const Params& p);

/// p_theta+ = p_theta-,  p_x+ = -p_x- + (2/ell) cos(theta) p_theta-.
State exterior_elastic_reset(const State& pre, const Params& p);

/// Moving-wall reset:
///   p_x+ = -p_x- + (2/ell) cos(theta) p_theta- - 2 v (M + m sin^2 theta).
/// Satisfies the corner conditions p_x+ = p_x- + eps, H- - H+ = eps v.
/// In velocities x_dot+ = -x_dot- - 2v, so the physical wall moves at -v.
State controlled_exterior_reset(const State& pre, double v, const Params& p);

/// p_x+ = nominal + k_pt (p_theta- - p_theta*) + k_px (p_x- - p_x*) + k_th (theta- - theta*).
State feedback_reset(const State& pre, const ResetLaw& law, const Params& p);

/// Dispatch on law.kind.
State apply_reset(const ResetLaw& law, const State& pre, const Params& p);

/// Analytic Jacobian of apply_reset with respect to the pre-impact state.
Mat4 reset_jacobian(const ResetLaw& law, const State& pre, const Params& p);

/// Post-impact connection under a moving-wall reset is F + B v with
///   F = (-p_x + (2/ell) cos(theta) p_theta) / (M+m),
///   B = -2 (M + m sin^2 theta) / (M+m)  (never zero).
struct AffineConnection {
  double offset = 0.0;  ///< F
  double slope = 0.0;   ///< B
};
AffineConnection controlled_connection_affine(const State& pre, const Params& p);

/// Unique wall velocity v* = (target - F) / B whose controlled reset yields
/// connection == target.
double symmetry_assignment_velocity(const State& pre, double target_connection, const Params& p);

/// connection(post) - connection(pre).
double connection_jump(const State& pre, const State& post, const Params& p);

/// Fill the derived fields of an impact record.
ImpactRecord make_impact_record(double time, const State& pre, const State& post,
                                const Guard& guard, const ResetLaw& law, std::size_t guard_index,
                                const Params& p);

}  // namespace cartimpact
