#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cartimpact/error.hpp"
#include "cartimpact/model.hpp"
#include "oracles.hpp"

using namespace cartimpact;

namespace {

const Params unit{1.0, 1.0, 1.0, 9.81, 0.0};

Vec4 vector_field_from_hamiltonian(const State& s, const Params& p, double h) {
  Vec4 grad{};
  for (std::size_t i = 0; i < 4; ++i) {
    Vec4 up = s.as_vec(), dn = s.as_vec();
    up[i] += h;
    dn[i] -= h;
    grad[i] = (hamiltonian(State::from_vec(up), p) - hamiltonian(State::from_vec(dn), p)) / (2 * h);
  }
  return {grad[2], grad[3], -grad[0] - p.alpha * s.p_theta, -grad[1] - p.alpha * s.p_x};
}

}  // namespace

TEST_CASE("params validation") {
  CHECK_NOTHROW(unit.validate());
  Params bad = unit;
  bad.m = 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = unit;
  bad.alpha = -1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = unit;
  bad.g = std::nan("");
  CHECK_THROWS_AS(bad.validate(), Error);
  CHECK(unit.locked_inertia() == 2.0);
}

TEST_CASE("hamiltonian examples") {
  CHECK(hamiltonian({0, 0, 0, 0}, unit) == doctest::Approx(-9.81));
  CHECK(hamiltonian({std::numbers::pi, 0, 0, 0}, unit) == doctest::Approx(9.81));
  CHECK(hamiltonian({0, 0, 1, 0}, unit) == doctest::Approx(-8.81).epsilon(1e-14));
  Params other{2.0, 0.5, 1.5, 3.0, 0.0};
  CHECK(hamiltonian({0.3, 0, 0, 0}, other) == doctest::Approx(-0.5 * 3.0 * 1.5 * std::cos(0.3)));
}

TEST_CASE("hamiltonian equals the velocity-form energy") {
  oracle::Sampler s(10);
  for (int i = 0; i < 1000; ++i) {
    const Params p = s.params();
    const State st = s.state();
    CHECK(oracle::rel_err(hamiltonian(st, p), oracle::energy(st, p)) <= 1e-12);
  }
}

TEST_CASE("Legendre transform examples") {
  const Momenta rest = momenta_from_velocity(0.7, {0, 0}, unit);
  CHECK(rest.p_theta == 0.0);
  CHECK(rest.p_x == 0.0);
  const Momenta side = momenta_from_velocity(std::numbers::pi / 2, {1, 0}, unit);
  CHECK(side.p_theta == doctest::Approx(1.0));
  CHECK(std::abs(side.p_x) <= 1e-15);
  const Momenta both = momenta_from_velocity(0.0, {1, 1}, unit);
  CHECK(both.p_theta == doctest::Approx(2.0));
  CHECK(both.p_x == doctest::Approx(3.0));

  const Velocity v = velocity_from_momenta({0, 0, 2, 3}, unit);
  CHECK(v.theta_dot == doctest::Approx(1.0));
  CHECK(v.x_dot == doctest::Approx(1.0));
  const Velocity zero = velocity_from_momenta({1.2, 0, 0, 0}, unit);
  CHECK(zero.theta_dot == 0.0);
  CHECK(zero.x_dot == 0.0);
}

TEST_CASE("Legendre roundtrip and independent solve") {
  oracle::Sampler s(11);
  for (int i = 0; i < 1000; ++i) {
    const Params p = s.params();
    const double theta = s.uniform(-3.1, 3.1);
    const Velocity v{s.uniform(-3, 3), s.uniform(-3, 3)};
    const Momenta mom = momenta_from_velocity(theta, v, p);
    const Velocity back = velocity_from_momenta({theta, 0, mom.p_theta, mom.p_x}, p);
    CHECK(std::abs(back.theta_dot - v.theta_dot) <= 1e-12 * std::max(1.0, std::abs(v.theta_dot)));
    CHECK(std::abs(back.x_dot - v.x_dot) <= 1e-12 * std::max(1.0, std::abs(v.x_dot)));

    const State st = s.state();
    const oracle::Vel ov = oracle::velocities(st, p);
    const Velocity lv = velocity_from_momenta(st, p);
    CHECK(oracle::rel_err(ov.theta_dot, lv.theta_dot) <= 1e-12);
    CHECK(oracle::rel_err(ov.x_dot, lv.x_dot) <= 1e-12);
  }
}

TEST_CASE("metric determinant is positive") {
  oracle::Sampler s(12);
  for (int i = 0; i < 200; ++i) {
    const Params p = s.params();
    CHECK(metric_determinant(s.uniform(-10, 10), p) > 0.0);
  }
  CHECK(metric_determinant(0.0, unit) == doctest::Approx(1.0));
  CHECK(metric_determinant(std::numbers::pi / 2, unit) == doctest::Approx(2.0));
}

TEST_CASE("connection in momentum and velocity form") {
  CHECK(connection({0.4, 0, 1.0, 0.0}, unit) == 0.0);
  CHECK(connection({0.4, 0, 1.0, 2.0}, unit) == doctest::Approx(1.0));
  oracle::Sampler s(13);
  for (int i = 0; i < 1000; ++i) {
    const Params p = s.params();
    const State st = s.state();
    const oracle::Vel v = oracle::velocities(st, p);
    const double from_vel = connection_from_velocity(st.theta, {v.theta_dot, v.x_dot}, p);
    CHECK(std::abs(from_vel - connection(st, p)) <= 1e-12 * std::max(1.0, std::abs(connection(st, p))));
  }
}

TEST_CASE("vector field at equilibria") {
  for (double alpha : {0.0, 1.0}) {
    Params p = unit;
    p.alpha = alpha;
    for (double theta : {0.0, std::numbers::pi}) {
      const Vec4 f = vector_field({theta, 0.3, 0, 0}, p);
      for (double v : f) CHECK(std::abs(v) <= 1e-14);
    }
  }
}

TEST_CASE("vector field matches finite differences of the hamiltonian") {
  oracle::Sampler s(14);
  for (int i = 0; i < 1000; ++i) {
    const Params p = s.params(s.uniform(0.0, 2.0));
    const State st = s.state();
    const Vec4 f = vector_field(st, p);
    const Vec4 fd = vector_field_from_hamiltonian(st, p, 1e-6);
    for (std::size_t k = 0; k < 4; ++k) CHECK(oracle::rel_err(f[k], fd[k]) <= 1e-6);
  }
}

TEST_CASE("cyclic symmetry in x is exact") {
  oracle::Sampler s(15);
  for (int i = 0; i < 200; ++i) {
    const Params p = s.params(0.5);
    State a = s.state();
    State b = a;
    b.x += s.uniform(-100, 100);
    CHECK(hamiltonian(a, p) == hamiltonian(b, p));
    CHECK(vector_field(a, p) == vector_field(b, p));
    CHECK(flow_jacobian(a, p) == flow_jacobian(b, p));
  }
}

TEST_CASE("flow jacobian") {
  oracle::Sampler s(16);
  for (int i = 0; i < 1000; ++i) {
    const Params p = s.params(s.uniform(0.0, 2.0));
    const State st = s.state();
    const Mat4 j = flow_jacobian(st, p);
    for (std::size_t r = 0; r < 4; ++r) CHECK(j(r, 1) == 0.0);
    for (std::size_t c = 0; c < 4; ++c) {
      Vec4 up = st.as_vec(), dn = st.as_vec();
      up[c] += 1e-6;
      dn[c] -= 1e-6;
      const Vec4 fu = vector_field(State::from_vec(up), p);
      const Vec4 fdn = vector_field(State::from_vec(dn), p);
      for (std::size_t r = 0; r < 4; ++r) CHECK(oracle::rel_err(j(r, c), (fu[r] - fdn[r]) / 2e-6) <= 1e-5);
    }
    CHECK(trace(j) == doctest::Approx(-2.0 * p.alpha).epsilon(1e-10));
  }
}

TEST_CASE("linearization at the stable equilibrium is a centre") {
  const auto e = eigenvalues(flow_jacobian({0, 0, 0, 0}, unit));
  int zero = 0, imaginary = 0;
  for (const auto& v : e) {
    CHECK(std::abs(v.re) <= 1e-10);
    if (v.modulus <= 1e-10) ++zero;
    if (std::abs(v.im) > 1e-3) ++imaginary;
  }
  CHECK(zero == 2);
  CHECK(imaginary == 2);
  // Small oscillation frequency of the cart-pendulum: g (M+m) / (M l).
  const double omega = std::sqrt(unit.g * (unit.M + unit.m) / (unit.M * unit.ell));
  CHECK(e[0].modulus == doctest::Approx(omega).epsilon(1e-12));
}
