// Acceptance report: one PASS/FAIL line per criterion.
//
//   acceptance [--criterion N] [--config configs/default.yaml]
//
// Exit status is nonzero when any selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "cartimpact/experiments.hpp"
#include "config.hpp"
#include "oracles.hpp"
#include "output.hpp"

using namespace cartimpact;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + ("failed: " + what);
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

struct Context {
  app::RunConfig cfg;

  OrbitSpec seed() const {
    OrbitSpec o;
    o.walls = cfg.orbit.walls;
    o.fixed_point = cfg.orbit.guess;
    return o;
  }
  OrbitSpec default_orbit() const {
    return find_periodic_orbit(cfg.orbit.guess, cfg.orbit.walls, cfg.integrator, cfg.params, cfg.orbit.newton);
  }
  SweepConfig sweep(double alpha, std::size_t workers = 1) const {
    SweepConfig sc = cfg.sweep;
    sc.orbit = seed();
    sc.alpha = alpha;
    sc.workers = workers;
    return sc;
  }
  BasinConfig basin(std::size_t workers = 1) const {
    BasinConfig bc = cfg.basin;
    bc.workers = workers;
    return bc;
  }
};

std::string g(double v) { return fmt::format("{:.6g}", v); }

Outcome reset_identities(const Context&) {
  Outcome o;
  oracle::Sampler s(101);
  double worst_interior = 0.0, worst_exterior = 0.0, worst_corner = 0.0;
  bool px_exact = true;
  for (int i = 0; i < 1000; ++i) {
    const Params p = s.params();
    const State pre = s.state();
    const double h = oracle::energy(pre, p);
    const State in = interior_reset(pre, p);
    px_exact = px_exact && in.p_x == pre.p_x;
    worst_interior = std::max(worst_interior, oracle::rel_err(oracle::energy(in, p), h));
    worst_exterior = std::max(worst_exterior, oracle::rel_err(oracle::energy(exterior_elastic_reset(pre, p), p), h));
    const double v = s.uniform(-3, 3);
    const State post = controlled_exterior_reset(pre, v, p);
    worst_corner = std::max(worst_corner, std::abs((h - oracle::energy(post, p)) - (post.p_x - pre.p_x) * v));
  }
  o.require(px_exact, "interior reset keeps p_x exactly");
  o.require(worst_interior <= 1e-10, "interior energy " + g(worst_interior));
  o.require(worst_exterior <= 1e-10, "exterior energy " + g(worst_exterior));
  o.require(worst_corner <= 1e-10, "corner condition " + g(worst_corner));
  o.note("energy rel err interior " + g(worst_interior) + ", exterior " + g(worst_exterior) + ", corner " +
         g(worst_corner));
  return o;
}

Outcome symmetry_closure(const Context&) {
  Outcome o;
  oracle::Sampler s(102);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Params p = s.params();
    const State pre = s.state();
    const double target = s.uniform(-3, 3);
    const State post = controlled_exterior_reset(pre, symmetry_assignment_velocity(pre, target, p), p);
    worst = std::max(worst, std::abs(post.p_x / (p.M + p.m) - target));
  }
  o.require(worst <= 1e-12, "closure " + g(worst));
  o.note("max |A(post) - target| " + g(worst));
  return o;
}

Outcome dichotomy(const Context& c) {
  Outcome o;
  const InteriorExteriorReport rep = interior_vs_exterior_demo(c.cfg.params, c.cfg.integrator);
  o.require(rep.interior.connection_jump == 0.0, "interior jump " + g(rep.interior.connection_jump));
  o.require(std::abs(rep.exterior.connection_jump) > 1e-6, "exterior jump " + g(rep.exterior.connection_jump));
  o.note("interior jump " + g(rep.interior.connection_jump) + ", exterior jump " +
         g(rep.exterior.connection_jump) + " from (theta, x, p_theta, p_x) = (0, 0, 1.5, 1)");
  return o;
}

Outcome saltation_vs_fd(const Context& c) {
  Outcome o;
  const OrbitSpec orbit = c.default_orbit();
  const HybridTrajectory traj = periodic_trajectory(orbit, c.cfg.integrator, c.cfg.params);
  const MonodromyReport rep = monodromy(traj, c.cfg.integrator, c.cfg.params, c.cfg.floquet.monodromy);
  const auto guards = orbit.walls.guards();
  const Mat4 fd = time_map_jacobian_fd(traj, guards, c.cfg.integrator, c.cfg.params, c.cfg.floquet.fd_step);
  const double dev = oracle::max_rel_err(rep.monodromy, fd);
  o.require(dev <= 1e-4, "deviation " + g(dev));
  o.note("max relative entry deviation " + g(dev));
  return o;
}

Outcome conservative_structure(const Context& c) {
  Outcome o;
  Params cons = c.cfg.params;
  cons.alpha = 0.0;
  const OrbitSpec seed = c.default_orbit();
  const OrbitSpec elastic =
      find_periodic_orbit(seed.fixed_point, WallSystem{seed.walls.x_star, ResetLaw::exterior_elastic(),
                                                       ResetLaw::exterior_elastic(), 2},
                          c.cfg.integrator, cons, c.cfg.orbit.newton);
  const MonodromyReport r0 = analyze_orbit(elastic, c.cfg.integrator, cons, c.cfg.floquet.monodromy);
  const ComplexEig& t = r0.multipliers[r0.trivial_index];
  const double trivial = std::hypot(t.re - 1.0, t.im);
  o.require(std::abs(r0.determinant - 1.0) <= 1e-6, "alpha=0 det " + g(r0.determinant));
  o.require(trivial <= 1e-5, "trivial multiplier offset " + g(trivial));

  // alpha = 1: the default orbit, and a moving-wall orbit whose resets are
  // full rank so the determinant is not trivially zero.
  Params damped = c.cfg.params;
  damped.alpha = 1.0;
  const OrbitSpec d = find_periodic_orbit(seed.fixed_point, seed.walls, c.cfg.integrator, damped, c.cfg.orbit.newton);
  const MonodromyReport r1 = analyze_orbit(d, c.cfg.integrator, damped, c.cfg.floquet.monodromy);
  const WallSystem moving{seed.walls.x_star, ResetLaw::controlled(0.6), ResetLaw::controlled(-0.6), 2};
  const OrbitSpec m = find_periodic_orbit(c.cfg.orbit.guess, moving, c.cfg.integrator, damped, c.cfg.orbit.newton);
  const MonodromyReport r2 = analyze_orbit(m, c.cfg.integrator, damped, c.cfg.floquet.monodromy);
  o.require(r1.determinant < 1.0, "alpha=1 default orbit det " + g(r1.determinant));
  o.require(r2.determinant < 1.0, "alpha=1 moving-wall orbit det " + g(r2.determinant));
  o.note("alpha=0 elastic det " + fmt::format("{:.12g}", r0.determinant) + ", |lambda_trivial - 1| " + g(trivial) +
         "; alpha=1 det " + g(r1.determinant) + " (default), " + g(r2.determinant) + " (moving wall v=0.6)");
  return o;
}

Outcome gain_sweep_shape(const Context& c) {
  Outcome o;
  const SweepResult damped = gain_sweep(c.sweep(1.0), c.cfg.params, c.cfg.integrator);
  const SweepResult cons = gain_sweep(c.sweep(0.0), c.cfg.params, c.cfg.integrator);
  const std::size_t stable = damped.count_stable();
  o.require(stable > 0, "no stable cell at alpha=1");
  std::size_t below = 0;
  for (const SweepCell& cell : cons.cells)
    if (cell.status == "ok" && cell.rho_max < 1.0 - 1e-3) ++below;
  o.require(below == 0, fmt::format("{} cells below 1 - 1e-3 at alpha=0", below));
  const auto b1 = damped.best();
  const auto b0 = cons.best();
  o.note(fmt::format("alpha=1: {}/{} stable, min rho {} at ({}, {})", stable, damped.cells.size(),
                     b1 ? g(b1->rho_max) : "n/a", b1 ? g(b1->kappa_theta) : "", b1 ? g(b1->kappa_p_theta) : ""));
  o.note(fmt::format("alpha=0: min rho {} at ({}, {}), failed cells {}", b0 ? g(b0->rho_max) : "n/a",
                     b0 ? g(b0->kappa_theta) : "", b0 ? g(b0->kappa_p_theta) : "", cons.count_failed()));
  return o;
}

Outcome basin_shape(const Context& c) {
  Outcome o;
  const FeedbackGains gains = c.cfg.basin_gains;
  SweepConfig sc = c.sweep(1.0);
  const SweepResult sweep = gain_sweep(sc, c.cfg.params, c.cfg.integrator);
  const SweepCell* cell = nullptr;
  for (const SweepCell& s : sweep.cells)
    if (s.kappa_theta == gains.kappa_theta && s.kappa_p_theta == gains.kappa_p_theta) cell = &s;
  o.require(cell != nullptr, "basin gains are not a sweep grid cell");
  if (cell) o.require(cell->stable, "basin gains are not a stabilizing cell");

  Params damped = c.cfg.params;
  damped.alpha = 1.0;
  const BasinConfig bc = c.basin();
  const BasinResult res = basin_map(bc, sweep.open_loop, gains, c.cfg.integrator, damped);
  const std::size_t conv = res.count_converged();
  o.require(conv > 0, "empty converged region");

  // Lap count at the orbit point itself (zero offsets).
  const WallSystem walls = feedback_walls(sweep.open_loop, gains, c.cfg.integrator, damped);
  const State post = orbit_impacts(sweep.open_loop, c.cfg.integrator, damped)[0].post;
  const BasinCell at_orbit = basin_cell(post, walls, sweep.open_loop, bc, c.cfg.integrator, damped);
  o.require(at_orbit.status == "converged", "orbit point status " + at_orbit.status);
  o.note(fmt::format("gains ({}, {}) rho {}; converged {}/{} cells, area fraction {}; orbit point {}",
                     g(gains.kappa_theta), g(gains.kappa_p_theta), cell ? g(cell->rho_max) : "n/a", conv,
                     res.cells.size(), g(res.converged_fraction()), at_orbit.status));
  return o;
}

Outcome numerics_hygiene(const Context&) {
  Outcome o;
  oracle::Sampler s(108);
  double worst_f = 0.0, worst_j = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Params p = s.params(s.uniform(0.0, 2.0));
    const State st = s.state();
    const Vec4 f = vector_field(st, p);
    const Mat4 j = flow_jacobian(st, p);
    Vec4 grad{};
    for (std::size_t k = 0; k < 4; ++k) {
      Vec4 up = st.as_vec(), dn = st.as_vec();
      up[k] += 1e-6;
      dn[k] -= 1e-6;
      grad[k] = (hamiltonian(State::from_vec(up), p) - hamiltonian(State::from_vec(dn), p)) / 2e-6;
      const Vec4 fu = vector_field(State::from_vec(up), p);
      const Vec4 fd = vector_field(State::from_vec(dn), p);
      for (std::size_t r = 0; r < 4; ++r) worst_j = std::max(worst_j, oracle::rel_err(j(r, k), (fu[r] - fd[r]) / 2e-6));
    }
    const Vec4 ref{grad[2], grad[3], -grad[0] - p.alpha * st.p_theta, -grad[1] - p.alpha * st.p_x};
    for (std::size_t k = 0; k < 4; ++k) worst_f = std::max(worst_f, oracle::rel_err(f[k], ref[k]));
  }
  o.require(worst_f <= 1e-5, "vector field " + g(worst_f));
  o.require(worst_j <= 1e-5, "jacobian " + g(worst_j));

  const Params p{1.0, 1.0, 1.0, 9.81, 0.0};
  auto final_state = [&](double dt) {
    IntegratorConfig cfg;
    cfg.dt = dt;
    cfg.t_max = 10.0;
    RunOptions opts;
    opts.record_samples = false;
    return run_hybrid({0.5, 0.0, 0.3, 0.4}, {}, cfg, p, opts).final_state;
  };
  auto dist = [](const State& a, const State& b) {
    return std::max({std::abs(a.theta - b.theta), std::abs(a.x - b.x), std::abs(a.p_theta - b.p_theta),
                     std::abs(a.p_x - b.p_x)});
  };
  const State a = final_state(0.01), b = final_state(0.005), c = final_state(0.0025);
  const double order = std::log2(dist(a, b) / dist(b, c));
  o.require(order >= 3.8, "RK4 order " + g(order));

  const std::vector<GuardedReset> guard{
      {{GuardKind::InteriorAngle, 0.3, CrossingDirection::Increasing}, ResetLaw::interior_elastic()}};
  auto hit_time = [&](double tol) {
    IntegratorConfig cfg;
    cfg.dt = 0.1;
    cfg.t_max = 2.0;
    cfg.event_tol = tol;
    RunOptions opts;
    opts.stop_after_impacts = 1;
    opts.record_samples = false;
    return run_hybrid({0.0, 0.0, 1.5, 1.0}, guard, cfg, p, opts).impacts.at(0).time;
  };
  const double ref = hit_time(1e-15);
  bool refining = true;
  double prev = INFINITY;
  for (double tol : {1e-3, 1e-5, 1e-7, 1e-9, 1e-11}) {
    const double err = std::abs(hit_time(tol) - ref);
    refining = refining && err <= tol && err <= prev;
    prev = err;
  }
  o.require(refining, "event time does not converge under tolerance refinement");
  o.note("vector field " + g(worst_f) + ", jacobian " + g(worst_j) + ", RK4 order " + g(order) +
         ", event refinement ok");
  return o;
}

Outcome determinism(const Context& c) {
  Outcome o;
  Params damped = c.cfg.params;
  damped.alpha = 1.0;
  std::optional<std::string> sweep_ref, basin_ref;
  bool same = true;
  for (std::size_t w : {1u, 2u, 8u}) {
    const SweepResult sr = gain_sweep(c.sweep(1.0, w), c.cfg.params, c.cfg.integrator);
    const std::string sweep = app::sweep_csv(sr);
    const std::string basin =
        app::basin_csv(basin_map(c.basin(w), sr.open_loop, c.cfg.basin_gains, c.cfg.integrator, damped));
    if (!sweep_ref) {
      sweep_ref = sweep;
      basin_ref = basin;
      continue;
    }
    if (sweep != *sweep_ref) {
      same = false;
      o.require(false, fmt::format("sweep CSV differs with {} workers", w));
    }
    if (basin != *basin_ref) {
      same = false;
      o.require(false, fmt::format("basin CSV differs with {} workers", w));
    }
  }
  if (same) o.note("sweep and basin CSVs identical for 1, 2, 8 workers");
  return o;
}

struct Criterion {
  int id;
  double budget_s;
  std::function<Outcome(const Context&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  std::string config = "configs/default.yaml";
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--criterion" && i + 1 < argc) only = std::atoi(argv[++i]);
    else if (a == "--config" && i + 1 < argc) config = argv[++i];
    else {
      std::fprintf(stderr, "usage: acceptance [--criterion N] [--config FILE]\n");
      return 2;
    }
  }

  Context ctx;
  try {
    ctx.cfg = app::load_config(config);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "cannot load %s: %s\n", config.c_str(), e.what());
    return 2;
  }

  const std::vector<Criterion> criteria{
      {1, 1.0, reset_identities},   {2, 1.0, symmetry_closure},     {3, 1.0, dichotomy},
      {4, 30.0, saltation_vs_fd},   {5, 30.0, conservative_structure}, {6, 600.0, gain_sweep_shape},
      {7, 600.0, basin_shape},      {8, 10.0, numerics_hygiene},    {9, 600.0, determinism},
  };

  bool all = true;
  for (const Criterion& c : criteria) {
    if (only != 0 && c.id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run(ctx);
    } catch (const std::exception& e) {
      out.pass = false;
      out.note(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_s) out.require(false, fmt::format("runtime over {} s budget", c.budget_s));
    all = all && out.pass;
    fmt::print("criterion {}: {} ({}; {:.2f} s)\n", c.id, out.pass ? "PASS" : "FAIL", out.detail, secs);
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
