#include "cartimpact/hybrid.hpp"

#include <cmath>
#include <numbers>

#include "cartimpact/error.hpp"

namespace cartimpact {

namespace {

// Wrap into (-pi, pi].
double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::remainder(a, two_pi);
  if (r <= -std::numbers::pi) r += two_pi;
  return r;
}

}  // namespace

double guard_value(const Guard& guard, const State& s) {
  switch (guard.kind) {
    case GuardKind::InteriorAngle:
      return wrap_angle(s.theta - guard.level);
    case GuardKind::ExteriorWall:
      return s.x - guard.level;
  }
  return 0.0;
}

Vec4 guard_gradient(const Guard& guard) {
  switch (guard.kind) {
    case GuardKind::InteriorAngle:
      return {1.0, 0.0, 0.0, 0.0};
    case GuardKind::ExteriorWall:
      return {0.0, 1.0, 0.0, 0.0};
  }
  return {};
}

double guard_rate(const Guard& guard, const State& s, const Params& p) {
  return dot(guard_gradient(guard), vector_field(s, p));
}

void ResetLaw::validate() const {
  const bool finite = std::isfinite(wall_velocity) && std::isfinite(gains.kappa_theta) &&
                      std::isfinite(gains.kappa_p_theta) && std::isfinite(gains.kappa_p_x) &&
                      std::isfinite(reference.theta) && std::isfinite(reference.p_theta) &&
                      std::isfinite(reference.p_x) && std::isfinite(nominal_p_x);
  if (!finite) throw Error(ErrorCode::InvalidArgument, "reset law parameters must be finite");
}

std::string_view to_string(GuardKind kind) {
  switch (kind) {
    case GuardKind::InteriorAngle:
      return "interior";
    case GuardKind::ExteriorWall:
      return "exterior";
  }
  return "?";
}

std::string_view to_string(CrossingDirection direction) {
  switch (direction) {
    case CrossingDirection::Increasing:
      return "increasing";
    case CrossingDirection::Decreasing:
      return "decreasing";
    case CrossingDirection::Either:
      return "either";
  }
  return "?";
}

std::string_view to_string(ResetKind kind) {
  switch (kind) {
    case ResetKind::InteriorElastic:
      return "interior_elastic";
    case ResetKind::ExteriorElastic:
      return "exterior_elastic";
    case ResetKind::ControlledWall:
      return "controlled";
    case ResetKind::FeedbackWall:
      return "feedback";
  }
  return "?";
}

State interior_reset(const State& pre, const Params& p) {
  State post = pre;
  post.p_theta = -pre.p_theta + (2.0 * p.m * p.ell / p.locked_inertia()) * std::cos(pre.theta) * pre.p_x;
  return post;
}

State exterior_elastic_reset(const State& pre, const Params& p) {
  State post = pre;
  post.p_x = -pre.p_x + (2.0 / p.ell) * std::cos(pre.theta) * pre.p_theta;
  return post;
}

State controlled_exterior_reset(const State& pre, double v, const Params& p) {
  if (v == 0.0) return exterior_elastic_reset(pre, p);
  const double sn = std::sin(pre.theta);
  State post = pre;
  post.p_x = -pre.p_x + (2.0 / p.ell) * std::cos(pre.theta) * pre.p_theta -
             2.0 * v * (p.M + p.m * sn * sn);
  return post;
}

State feedback_reset(const State& pre, const ResetLaw& law, const Params&) {
  const FeedbackGains& k = law.gains;
  const ReferencePoint& ref = law.reference;
  State post = pre;
  post.p_x = law.nominal_p_x + k.kappa_p_theta * (pre.p_theta - ref.p_theta) +
             k.kappa_p_x * (pre.p_x - ref.p_x) + k.kappa_theta * (pre.theta - ref.theta);
  return post;
}

State apply_reset(const ResetLaw& law, const State& pre, const Params& p) {
  switch (law.kind) {
    case ResetKind::InteriorElastic:
      return interior_reset(pre, p);
    case ResetKind::ExteriorElastic:
      return exterior_elastic_reset(pre, p);
    case ResetKind::ControlledWall:
      return controlled_exterior_reset(pre, law.wall_velocity, p);
    case ResetKind::FeedbackWall:
      return feedback_reset(pre, law, p);
  }
  return pre;
}

Mat4 reset_jacobian(const ResetLaw& law, const State& pre, const Params& p) {
  Mat4 j = Mat4::identity();
  const double c = std::cos(pre.theta);
  const double sn = std::sin(pre.theta);
  switch (law.kind) {
    case ResetKind::InteriorElastic: {
      const double k = 2.0 * p.m * p.ell / p.locked_inertia();
      j(2, 0) = -k * sn * pre.p_x;
      j(2, 2) = -1.0;
      j(2, 3) = k * c;
      break;
    }
    case ResetKind::ExteriorElastic:
    case ResetKind::ControlledWall: {
      const double v = law.kind == ResetKind::ControlledWall ? law.wall_velocity : 0.0;
      j(3, 0) = -(2.0 / p.ell) * sn * pre.p_theta - 4.0 * v * p.m * sn * c;
      j(3, 2) = (2.0 / p.ell) * c;
      j(3, 3) = -1.0;
      break;
    }
    case ResetKind::FeedbackWall:
      j(3, 0) = law.gains.kappa_theta;
      j(3, 2) = law.gains.kappa_p_theta;
      j(3, 3) = law.gains.kappa_p_x;
      break;
  }
  return j;
}

AffineConnection controlled_connection_affine(const State& pre, const Params& p) {
  const double sn = std::sin(pre.theta);
  const double mass = p.locked_inertia();
  return {(-pre.p_x + (2.0 / p.ell) * std::cos(pre.theta) * pre.p_theta) / mass,
          -2.0 * (p.M + p.m * sn * sn) / mass};
}

double symmetry_assignment_velocity(const State& pre, double target_connection, const Params& p) {
  const AffineConnection a = controlled_connection_affine(pre, p);
  return (target_connection - a.offset) / a.slope;
}

double connection_jump(const State& pre, const State& post, const Params& p) {
  return connection(post, p) - connection(pre, p);
}

ImpactRecord make_impact_record(double time, const State& pre, const State& post,
                                const Guard& guard, const ResetLaw& law, std::size_t guard_index,
                                const Params& p) {
  ImpactRecord r;
  r.time = time;
  r.pre = pre;
  r.post = post;
  r.impulse = post.p_x - pre.p_x;
  r.energy_jump = hamiltonian(pre, p) - hamiltonian(post, p);
  r.guard = guard;
  r.law = law;
  r.guard_index = guard_index;
  return r;
}

}  // namespace cartimpact
