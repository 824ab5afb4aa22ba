#include "cartimpact/model.hpp"

#include <cmath>

#include "cartimpact/error.hpp"

namespace cartimpact {

// With c = cos(theta), s = sin(theta), a = M + m s^2 and D = m ell^2 a:
//
//   H        = [(M+m) pt^2 - 2 m ell c pt px + m ell^2 px^2] / (2D) - m g ell c
//   dH/dpt   = [(M+m) pt - m ell c px] / D                    = theta_dot
//   dH/dpx   = [m ell^2 px - m ell c pt] / D                  = x_dot
//   dH/dtheta = m ell s theta_dot x_dot + m g ell s
//
// The last line is -dL/dtheta evaluated at the Legendre-transformed
// velocities. Second derivatives follow by differentiating theta_dot and
// x_dot, with dD/dtheta = 2 m^2 ell^2 s c.

void Params::validate() const {
  const bool finite = std::isfinite(M) && std::isfinite(m) && std::isfinite(ell) &&
                      std::isfinite(g) && std::isfinite(alpha);
  if (!finite) throw Error(ErrorCode::InvalidArgument, "parameters must be finite");
  if (!(M > 0.0)) throw Error(ErrorCode::InvalidArgument, "cart mass M must be positive");
  if (!(m > 0.0)) throw Error(ErrorCode::InvalidArgument, "bob mass m must be positive");
  if (!(ell > 0.0)) throw Error(ErrorCode::InvalidArgument, "rod length ell must be positive");
  if (g < 0.0) throw Error(ErrorCode::InvalidArgument, "gravity g must be nonnegative");
  if (alpha < 0.0) throw Error(ErrorCode::InvalidArgument, "dissipation alpha must be nonnegative");
}

bool is_finite(const State& s) {
  return std::isfinite(s.theta) && std::isfinite(s.x) && std::isfinite(s.p_theta) &&
         std::isfinite(s.p_x);
}

double metric_determinant(double theta, const Params& p) {
  const double sn = std::sin(theta);
  return p.m * p.ell * p.ell * (p.M + p.m * sn * sn);
}

double hamiltonian(const State& s, const Params& p) {
  const double c = std::cos(s.theta);
  const double num = (p.M + p.m) * s.p_theta * s.p_theta -
                     2.0 * p.m * p.ell * c * s.p_theta * s.p_x +
                     p.m * p.ell * p.ell * s.p_x * s.p_x;
  return num / (2.0 * metric_determinant(s.theta, p)) - p.m * p.g * p.ell * c;
}

Momenta momenta_from_velocity(double theta, const Velocity& v, const Params& p) {
  const double c = std::cos(theta);
  return {p.m * p.ell * p.ell * v.theta_dot + p.m * p.ell * c * v.x_dot,
          p.m * p.ell * c * v.theta_dot + (p.M + p.m) * v.x_dot};
}

Velocity velocity_from_momenta(const State& s, const Params& p) {
  const double c = std::cos(s.theta);
  const double d = metric_determinant(s.theta, p);
  return {((p.M + p.m) * s.p_theta - p.m * p.ell * c * s.p_x) / d,
          (-p.m * p.ell * c * s.p_theta + p.m * p.ell * p.ell * s.p_x) / d};
}

double connection(const State& s, const Params& p) { return s.p_x / p.locked_inertia(); }

double connection_from_velocity(double theta, const Velocity& v, const Params& p) {
  return ((p.M + p.m) * v.x_dot + p.m * p.ell * std::cos(theta) * v.theta_dot) /
         p.locked_inertia();
}

Vec4 vector_field(const State& s, const Params& p) {
  const double sn = std::sin(s.theta);
  const Velocity v = velocity_from_momenta(s, p);
  const double dH_dtheta = p.m * p.ell * sn * v.theta_dot * v.x_dot + p.m * p.g * p.ell * sn;
  return {v.theta_dot, v.x_dot, -dH_dtheta - p.alpha * s.p_theta, -p.alpha * s.p_x};
}

Mat4 flow_jacobian(const State& s, const Params& p) {
  const double c = std::cos(s.theta);
  const double sn = std::sin(s.theta);
  const double mass = p.M + p.m;
  const double ml = p.m * p.ell;
  const double d = metric_determinant(s.theta, p);
  const double dd = 2.0 * p.m * p.m * p.ell * p.ell * sn * c;  // dD/dtheta

  const double num_t = mass * s.p_theta - ml * c * s.p_x;
  const double num_x = -ml * c * s.p_theta + ml * p.ell * s.p_x;
  const double td = num_t / d;
  const double xd = num_x / d;

  // Partials of theta_dot and x_dot.
  const double td_th = (ml * sn * s.p_x) / d - num_t * dd / (d * d);
  const double td_pt = mass / d;
  const double td_px = -ml * c / d;
  const double xd_th = (ml * sn * s.p_theta) / d - num_x * dd / (d * d);
  const double xd_pt = -ml * c / d;
  const double xd_px = ml * p.ell / d;

  // Partials of dH/dtheta = ml sn td xd + m g ell sn.
  const double hth_th = ml * c * td * xd + ml * sn * (td_th * xd + td * xd_th) + p.m * p.g * p.ell * c;
  const double hth_pt = ml * sn * (td_pt * xd + td * xd_pt);
  const double hth_px = ml * sn * (td_px * xd + td * xd_px);

  Mat4 j;
  j(0, 0) = td_th;
  j(0, 2) = td_pt;
  j(0, 3) = td_px;
  j(1, 0) = xd_th;
  j(1, 2) = xd_pt;
  j(1, 3) = xd_px;
  j(2, 0) = -hth_th;
  j(2, 2) = -hth_pt - p.alpha;
  j(2, 3) = -hth_px;
  j(3, 3) = -p.alpha;
  return j;
}

}  // namespace cartimpact
