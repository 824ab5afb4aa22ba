#include "cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "cartimpact/error.hpp"
#include "cartimpact/experiments.hpp"
#include "cartimpact/floquet.hpp"
#include "cartimpact/orbit.hpp"
#include "config.hpp"
#include "output.hpp"

namespace cartimpact::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  std::string config_path;
  std::string output_dir;
  bool fd_check = false;
};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Config:
    case ErrorCode::InvalidArgument:
      return kExitConfig;
    case ErrorCode::Diverged:
    case ErrorCode::ZenoGuardTripped:
      return kExitDiverged;
    default:
      return kExitNumerical;
  }
}

json range_json(const Range& r) { return {{"min", r.min}, {"max", r.max}, {"n", r.n}}; }

json summary_cell(const SweepCell& c) {
  return {{"kappa_theta", c.kappa_theta}, {"kappa_ptheta", c.kappa_p_theta}, {"rho_max", c.rho_max}};
}

class Runner {
 public:
  Runner(RunConfig cfg, std::ostream& out, std::ostream& err, bool fd_check)
      : cfg_(std::move(cfg)), out_(out), err_(err), fd_check_(fd_check) {}

  void prepare_output() {
    std::error_code ec;
    fs::create_directories(cfg_.output_dir, ec);
    if (ec || !fs::is_directory(cfg_.output_dir))
      throw ConfigError("cannot create output directory '" + cfg_.output_dir.string() + "'");
    write_text(cfg_.output_dir / "resolved_config.yaml", dump_config(cfg_));
  }

  int simulate() {
    if (!cfg_.simulate.initial_state) throw ConfigError("simulate: missing field 'simulate.initial_state'");
    const std::vector<GuardedReset> guards =
        cfg_.simulate.guards.empty() ? cfg_.orbit.walls.guards() : cfg_.simulate.guards;
    RunOptions opts;
    opts.sample_stride = cfg_.simulate.sample_stride;
    IntegratorConfig integ = cfg_.integrator;
    integ.t_max = cfg_.simulate.t_max.value_or(integ.t_max);
    const HybridTrajectory traj = run_hybrid(*cfg_.simulate.initial_state, guards, integ, cfg_.params, opts);
    write_text(cfg_.output_dir / "trajectory.csv", trajectory_csv(traj));
    write_text(cfg_.output_dir / "impacts.csv", impacts_csv(traj));
    write_json(cfg_.output_dir / "summary.json",
               {{"command", "simulate"},
                {"termination", std::string(to_string(traj.termination))},
                {"message", traj.message},
                {"t_final", traj.t_final},
                {"arcs", traj.arcs.size()},
                {"impacts", traj.impacts.size()}});
    fmt::print(out_, "termination {} at t = {} after {} impacts\n", to_string(traj.termination),
               fmt17(traj.t_final), traj.impacts.size());
    switch (traj.termination) {
      case Termination::ZenoGuardTripped:
      case Termination::Diverged:
        fmt::print(err_, "error: {}\n", traj.message);
        return kExitDiverged;
      default:
        return kExitOk;
    }
  }

  int orbit() {
    const OrbitSpec o = find_orbit(cfg_.params);
    write_json(cfg_.output_dir / "orbit.json", to_json(o, cfg_.params));
    write_json(cfg_.output_dir / "summary.json", {{"command", "orbit"}, {"orbit", to_json(o, cfg_.params)}});
    fmt::print(out_, "fixed point theta = {} p_theta = {} p_x = {}\nperiod {} after {} Newton iterations\n",
               fmt17(o.fixed_point.theta), fmt17(o.fixed_point.p_theta), fmt17(o.fixed_point.p_x),
               fmt17(o.period), o.newton_iterations);
    return kExitOk;
  }

  int floquet() {
    const OrbitSpec o = cfg_.orbit.file ? load_orbit() : find_orbit(cfg_.params);
    const HybridTrajectory traj = periodic_trajectory(o, cfg_.integrator, cfg_.params);
    const MonodromyReport rep = monodromy(traj, cfg_.integrator, cfg_.params, cfg_.floquet.monodromy);
    json j = to_json(rep);
    int code = kExitOk;
    if (fd_check_) {
      const auto guards = o.walls.guards();
      const Mat4 fd = time_map_jacobian_fd(traj, guards, cfg_.integrator, cfg_.params, cfg_.floquet.fd_step);
      double worst = 0.0;
      for (std::size_t i = 0; i < 16; ++i) {
        const double a = rep.monodromy.a[i];
        const double b = fd.a[i];
        worst = std::max(worst, std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0}));
      }
      const bool pass = worst <= cfg_.floquet.fd_rel_tol;
      j["fd_check"] = {{"max_rel_deviation", worst}, {"tolerance", cfg_.floquet.fd_rel_tol}, {"pass", pass}};
      fmt::print(out_, "fd-check max relative deviation {} ({})\n", fmt17(worst), pass ? "pass" : "FAIL");
      if (!pass) code = kExitNumerical;
    }
    write_json(cfg_.output_dir / "monodromy.json", j);
    write_json(cfg_.output_dir / "summary.json",
               {{"command", "floquet"}, {"orbit", to_json(o, cfg_.params)}, {"report", j}});
    fmt::print(out_, "spectral radius {} -> {}\n", fmt17(rep.spectral_radius_excl_trivial),
               rep.stable ? "stable" : "not stable");
    return code;
  }

  int sweep() {
    SweepConfig sc = cfg_.sweep;
    sc.orbit = cfg_.orbit.file ? load_orbit() : seed_orbit();
    const SweepResult res = gain_sweep(sc, cfg_.params, cfg_.integrator, progress("sweep"));
    write_text(cfg_.output_dir / "sweep.csv", sweep_csv(res));
    json s{{"command", "sweep"},
           {"config",
            {{"resolved_config", "resolved_config.yaml"},
             {"kappa_theta", range_json(sc.kappa_theta)},
             {"kappa_ptheta", range_json(sc.kappa_p_theta)},
             {"kappa_px", sc.kappa_p_x},
             {"alpha", sc.alpha},
             {"workers", sc.workers},
             {"params", to_json(cfg_.params)}}},
           {"cells", res.cells.size()},
           {"stable", res.count_stable()},
           {"failed", res.count_failed()},
           {"open_loop_orbit", to_json(res.open_loop, with_alpha(sc.alpha))}};
    if (auto b = res.best()) s["min_rho"] = summary_cell(*b);
    if (auto w = res.worst()) s["max_rho"] = summary_cell(*w);
    write_json(cfg_.output_dir / "summary.json", s);
    fmt::print(out_, "{} of {} cells stable, {} failed\n", res.count_stable(), res.cells.size(), res.count_failed());
    return kExitOk;
  }

  int basin() {
    const OrbitSpec o = cfg_.orbit.file ? load_orbit() : find_orbit(cfg_.params);
    const BasinResult res = basin_map(cfg_.basin, o, cfg_.basin_gains, cfg_.integrator, cfg_.params, progress("basin"));
    write_text(cfg_.output_dir / "basin.csv", basin_csv(res));
    std::size_t failed = 0;
    json reasons = json::object();
    for (const BasinCell& c : res.cells) {
      reasons[c.status] = reasons.value(c.status, 0) + 1;
      if (c.status != "converged" && c.status != "theta_bound" && c.status != "distance_bound" &&
          c.status != "timeout" && c.status != "sequence")
        ++failed;
    }
    std::size_t max_laps_seen = 0;
    for (const BasinCell& c : res.cells) max_laps_seen = std::max(max_laps_seen, c.laps);
    write_json(cfg_.output_dir / "summary.json",
               {{"command", "basin"},
                {"config",
                 {{"resolved_config", "resolved_config.yaml"},
                  {"coord1", std::string(to_string(cfg_.basin.coord1))},
                  {"coord2", std::string(to_string(cfg_.basin.coord2))},
                  {"range1", range_json(cfg_.basin.range1)},
                  {"range2", range_json(cfg_.basin.range2)},
                  {"max_laps", cfg_.basin.max_laps},
                  {"theta_bound", cfg_.basin.theta_bound},
                  {"state_distance_bound", cfg_.basin.resolved_distance_bound()},
                  {"no_impact_timeout", cfg_.basin.resolved_timeout(o)},
                  {"gains",
                   {{"kappa_theta", cfg_.basin_gains.kappa_theta},
                    {"kappa_ptheta", cfg_.basin_gains.kappa_p_theta},
                    {"kappa_px", cfg_.basin_gains.kappa_p_x}}},
                  {"workers", cfg_.basin.workers},
                  {"params", to_json(cfg_.params)}}},
                {"cells", res.cells.size()},
                {"converged", res.count_converged()},
                {"converged_fraction", res.converged_fraction()},
                {"failed", failed},
                {"status_counts", reasons},
                {"max_laps", res.max_laps},
                {"max_laps_reached", max_laps_seen},
                {"orbit", to_json(o, cfg_.params)}});
    fmt::print(out_, "{} of {} cells converged (area fraction {})\n", res.count_converged(), res.cells.size(),
               fmt17(res.converged_fraction()));
    return kExitOk;
  }

 private:
  Params with_alpha(double alpha) const {
    Params p = cfg_.params;
    p.alpha = alpha;
    return p;
  }

  OrbitSpec seed_orbit() const {
    OrbitSpec o;
    o.walls = cfg_.orbit.walls;
    o.fixed_point = cfg_.orbit.guess;
    return o;
  }

  OrbitSpec find_orbit(const Params& p) const {
    return find_periodic_orbit(cfg_.orbit.guess, cfg_.orbit.walls, cfg_.integrator, p, cfg_.orbit.newton);
  }

  OrbitSpec load_orbit() const {
    try {
      return orbit_from_json(read_json(*cfg_.orbit.file));
    } catch (const json::exception& e) {
      throw ConfigError("orbit.file '" + cfg_.orbit.file->string() + "': " + e.what());
    } catch (const std::runtime_error& e) {
      throw ConfigError("orbit.file: " + std::string(e.what()));
    }
  }

  RowProgress progress(const char* what) const {
    std::ostream& err = err_;
    return [&err, what](std::size_t done, std::size_t total) {
      fmt::print(err, "{}: row {}/{}\n", what, done, total);
      err.flush();
    };
  }

  RunConfig cfg_;
  std::ostream& out_;
  std::ostream& err_;
  bool fd_check_;
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulation and Floquet analysis of the impacting pendulum on a cart", "cartimpact"};
  app.require_subcommand(1);
  Options opts;
  std::size_t workers = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "YAML run configuration")->check(CLI::ExistingFile);
    sub->add_option("--output", opts.output_dir, "Output directory (overrides output_dir)");
    sub->add_option("--workers", workers, "Worker threads for sweep and basin")->check(CLI::PositiveNumber);
    sub->add_flag("--fd-check", opts.fd_check, "Cross-check the monodromy against finite differences");
  };
  const std::pair<const char*, const char*> commands[] = {
      {"simulate", "Integrate the hybrid system from simulate.initial_state"},
      {"orbit", "Locate the periodic two-wall orbit"},
      {"floquet", "Monodromy matrix and Floquet multipliers of the orbit"},
      {"sweep", "Largest nontrivial multiplier over a feedback gain grid"},
      {"basin", "Lap counts over a grid of perturbed initial conditions"},
  };
  for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    RunConfig cfg = opts.config_path.empty() ? RunConfig{} : load_config(opts.config_path);
    if (!opts.output_dir.empty()) cfg.output_dir = opts.output_dir;
    if (workers > 0) {
      cfg.sweep.workers = workers;
      cfg.basin.workers = workers;
    }
    Runner runner(std::move(cfg), out, err, opts.fd_check);
    runner.prepare_output();
    if (command == "simulate") return runner.simulate();
    if (command == "orbit") return runner.orbit();
    if (command == "floquet") return runner.floquet();
    if (command == "sweep") return runner.sweep();
    return runner.basin();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace cartimpact::app
