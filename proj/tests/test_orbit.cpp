#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cartimpact/error.hpp"
#include "cartimpact/newton.hpp"
#include "cartimpact/orbit.hpp"

using namespace cartimpact;

namespace {

const Params damped{1.0, 1.0, 1.0, 9.81, 1.0};
const Params conservative{1.0, 1.0, 1.0, 9.81, 0.0};
const SectionState default_guess{-0.48, 0.09, 2.93};

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidArgument;
}

State mirror(const State& s) { return {-s.theta, -s.x, -s.p_theta, -s.p_x}; }

double max_abs_diff(const State& a, const State& b) {
  return std::max({std::abs(a.theta - b.theta), std::abs(a.x - b.x), std::abs(a.p_theta - b.p_theta),
                   std::abs(a.p_x - b.p_x)});
}

}  // namespace

TEST_CASE("damped newton") {
  auto cos_fixed = [](const std::array<double, 1>& x) { return std::array<double, 1>{std::cos(x[0]) - x[0]}; };
  SUBCASE("scalar root") {
    const auto r = damped_newton<1>(cos_fixed, {0.7});
    CHECK(std::abs(r.x[0] - 0.7390851332151607) <= 1e-9);
    CHECK(r.residual_norm <= 1e-9);
    CHECK(r.iterations <= 5);
  }
  SUBCASE("an exact seed converges on the first pass") {
    const auto r = damped_newton<1>(cos_fixed, {0.7390851332151607});
    CHECK(r.iterations == 1);
  }
  SUBCASE("two-dimensional root") {
    auto g = [](const std::array<double, 2>& x) {
      return std::array<double, 2>{x[0] * x[0] + x[1] * x[1] - 1.0, x[0] - x[1]};
    };
    const auto r = damped_newton<2>(g, {1.0, 0.2});
    CHECK(r.x[0] == doctest::Approx(std::numbers::sqrt2 / 2).epsilon(1e-9));
    CHECK(r.x[1] == doctest::Approx(std::numbers::sqrt2 / 2).epsilon(1e-9));
  }
  SUBCASE("iteration budget") {
    NewtonOptions opts;
    opts.max_iterations = 2;
    CHECK(code_of([&] { damped_newton<1>(cos_fixed, {10.0}, opts); }) == ErrorCode::NoConvergence);
  }
  SUBCASE("singular jacobian") {
    auto g = [](const std::array<double, 2>& x) {
      return std::array<double, 2>{x[0] + x[1], 2 * x[0] + 2 * x[1] + 1.0};
    };
    CHECK(code_of([&] { damped_newton<2>(g, {0.0, 0.0}); }) == ErrorCode::SingularJacobian);
  }
}

TEST_CASE("section embedding") {
  const SectionState s{0.1, -0.2, 0.3};
  const State e = embed(s, 0.5);
  CHECK(e == State{0.1, 0.5, -0.2, 0.3});
  CHECK(restrict_to_section(e) == s);
  CHECK(max_abs_diff(s, SectionState{0.1, -0.25, 0.3}) == doctest::Approx(0.05));
}

TEST_CASE("wall system validation") {
  WallSystem w;
  CHECK_NOTHROW(w.validate());
  w.x_star = 0.0;
  CHECK_THROWS_AS(w.validate(), Error);
  w = WallSystem{};
  w.period_impacts = 0;
  CHECK_THROWS_AS(w.validate(), Error);
  const auto g = WallSystem{}.guards();
  REQUIRE(g.size() == 2);
  CHECK(g[0].guard.level == 0.5);
  CHECK(g[1].guard.level == -0.5);
  CHECK(g[0].guard.direction == CrossingDirection::Increasing);
  CHECK(g[1].guard.direction == CrossingDirection::Decreasing);
}

TEST_CASE("one-dimensional bounce return map") {
  // No gravity, rod horizontal: a point mass bouncing between the walls.
  const Params p{1.0, 1.0, 1.0, 0.0, 0.0};
  IntegratorConfig cfg;
  const SectionState s{std::numbers::pi / 2, 0.0, 2.0};
  const ReturnResult r = return_map(s, WallSystem{}, cfg, p);
  const double speed = s.p_x / (p.M + p.m);
  CHECK(r.time == doctest::Approx(2.0 * 1.0 / speed).epsilon(1e-12));
  CHECK(max_abs_diff(r.next, s) <= 1e-12);
}

TEST_CASE("return map failures") {
  IntegratorConfig cfg;
  cfg.t_max = 0.2;
  CHECK(code_of([&] { return_map(default_guess, nominal_walls(0.5, -4.0), cfg, damped); }) ==
        ErrorCode::NoReturn);
}

TEST_CASE("default orbit") {
  IntegratorConfig cfg;
  const OrbitSpec orbit = find_periodic_orbit(default_guess, nominal_walls(0.5, -4.0), cfg, damped);
  CHECK(orbit.residual <= 1e-9);
  CHECK(orbit.fixed_point.theta == doctest::Approx(-0.48353900533794447).epsilon(1e-8));
  CHECK(orbit.fixed_point.p_theta == doctest::Approx(0.087981632138340191).epsilon(1e-7));
  CHECK(orbit.fixed_point.p_x == doctest::Approx(2.9298307137835526).epsilon(1e-8));
  CHECK(orbit.period == doctest::Approx(0.62269943331992761).epsilon(1e-8));

  SUBCASE("return map is deterministic and fixes the orbit") {
    const ReturnResult a = return_map(orbit.fixed_point, orbit.walls, cfg, damped);
    const ReturnResult b = return_map(orbit.fixed_point, orbit.walls, cfg, damped);
    CHECK(a.next == b.next);
    CHECK(a.time == b.time);
    CHECK(max_abs_diff(a.next, orbit.fixed_point) <= 1e-9);
    CHECK(a.time == doctest::Approx(orbit.period).epsilon(1e-12));
  }
  SUBCASE("the left half is the mirror image of the right half") {
    const auto imps = orbit_impacts(orbit, cfg, damped);
    REQUIRE(imps.size() == 2);
    CHECK(max_abs_diff(mirror(imps[0].pre), imps[1].pre) <= 1e-8);
    CHECK(max_abs_diff(mirror(imps[0].post), imps[1].post) <= 1e-8);
    CHECK(imps[1].time - imps[0].time == doctest::Approx(orbit.period / 2).epsilon(1e-6));
  }
  SUBCASE("periodic trajectory closes") {
    const HybridTrajectory traj = periodic_trajectory(orbit, cfg, damped);
    CHECK(traj.impacts.size() == 2);
    CHECK(traj.termination == Termination::HorizonReached);
    CHECK(traj.t_final - traj.t0 == doctest::Approx(orbit.period));
    CHECK(max_abs_diff(traj.final_state, traj.initial) <= 1e-8);
  }
  SUBCASE("feedback walls keep the orbit a fixed point") {
    for (const FeedbackGains& k : {FeedbackGains{-5, 5, 0}, FeedbackGains{2, -1, 0.5}}) {
      const WallSystem w = feedback_walls(orbit, k, cfg, damped);
      CHECK(max_abs_diff(return_map(orbit.fixed_point, w, cfg, damped).next, orbit.fixed_point) <= 1e-8);
    }
  }
}

TEST_CASE("absurd guess fails cleanly") {
  IntegratorConfig cfg;
  NewtonOptions opts;
  opts.max_iterations = 10;
  CHECK(code_of([&] { find_periodic_orbit({2.5, 40.0, -60.0}, nominal_walls(0.5, -4.0), cfg, damped, opts); }) ==
        ErrorCode::NoConvergence);
}

TEST_CASE("elastic conservative orbit") {
  IntegratorConfig cfg;
  const WallSystem elastic{};
  const OrbitSpec seed = find_periodic_orbit(default_guess, nominal_walls(0.5, -4.0), cfg, damped);
  const OrbitSpec orbit = find_periodic_orbit(seed.fixed_point, elastic, cfg, conservative);
  CHECK(std::abs(orbit.fixed_point.p_theta) <= 1e-8);

  SUBCASE("five periods of re-simulation stay on the orbit") {
    SectionState s = orbit.fixed_point;
    for (int k = 0; k < 5; ++k) s = return_map(s, elastic, cfg, conservative).next;
    CHECK(max_abs_diff(s, orbit.fixed_point) <= 1e-6);
  }
  SUBCASE("area preservation and the trivial multiplier") {
    const MonodromyReport rep = analyze_orbit(orbit, cfg, conservative);
    CHECK(std::abs(rep.determinant - 1.0) <= 1e-6);
    const ComplexEig& t = rep.multipliers[rep.trivial_index];
    CHECK(std::hypot(t.re - 1.0, t.im) <= 1e-5);
  }
  SUBCASE("energy is the same at every impact") {
    const auto imps = orbit_impacts(orbit, cfg, conservative);
    for (const auto& imp : imps) {
      CHECK(std::abs(imp.energy_jump) <= 1e-12);
      CHECK(hamiltonian(imp.pre, conservative) == doctest::Approx(hamiltonian(imps[0].pre, conservative)));
    }
  }
}
