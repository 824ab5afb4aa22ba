#pragma once

// Closed-form mechanics of the pendulum on a cart.
//
// Configuration (theta, x) on S^1 x R, canonical momenta (p_theta, p_x).
// The cart coordinate x is cyclic: nothing here depends on it.

#include "cartimpact/linalg.hpp"

namespace cartimpact {

struct Params {
  double M = 1.0;      ///< cart mass [kg]
  double m = 1.0;      ///< bob mass [kg]
  double ell = 1.0;    ///< rod length [m]
  double g = 9.81;     ///< gravity [m/s^2]
  double alpha = 0.0;  ///< momentum dissipation rate [1/s]

  /// Throws InvalidArgument unless masses and length are positive and
  /// gravity and dissipation are nonnegative (all finite).
  void validate() const;

  /// Locked inertia of the translation symmetry, M + m.
  double locked_inertia() const { return M + m; }

  bool operator==(const Params&) const = default;
};

/// Phase-space point. theta is kept unwrapped on R.
struct State {
  double theta = 0.0;
  double x = 0.0;
  double p_theta = 0.0;
  double p_x = 0.0;

  Vec4 as_vec() const { return {theta, x, p_theta, p_x}; }
  static State from_vec(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }

  bool operator==(const State&) const = default;
};

bool is_finite(const State& s);

struct Velocity {
  double theta_dot = 0.0;
  double x_dot = 0.0;
};

struct Momenta {
  double p_theta = 0.0;
  double p_x = 0.0;
};

/// Kinetic metric determinant m ell^2 (M + m sin^2 theta); always > 0.
double metric_determinant(double theta, const Params& p);

double hamiltonian(const State& s, const Params& p);

/// Legendre transform (theta_dot, x_dot) -> (p_theta, p_x).
Momenta momenta_from_velocity(double theta, const Velocity& v, const Params& p);

/// Inverse Legendre transform.
Velocity velocity_from_momenta(const State& s, const Params& p);

/// Mechanical connection in momentum form, p_x / (M + m).
double connection(const State& s, const Params& p);

/// Same one-form evaluated on velocities: ((M+m) x_dot + m ell cos(theta) theta_dot) / (M+m).
double connection_from_velocity(double theta, const Velocity& v, const Params& p);

/// (dtheta/dt, dx/dt, dp_theta/dt, dp_x/dt) of the flow
///   q' = dH/dp,   p' = -dH/dq - alpha p.
/// alpha = 0 gives the conservative Hamiltonian flow.
Vec4 vector_field(const State& s, const Params& p);

/// Analytic Jacobian of vector_field with respect to (theta, x, p_theta, p_x).
Mat4 flow_jacobian(const State& s, const Params& p);

}  // namespace cartimpact
