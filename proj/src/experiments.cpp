#include "cartimpact/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "cartimpact/error.hpp"

namespace cartimpact {

double Range::at(std::size_t i) const {
  const double k = static_cast<double>(n - 1);
  const double fi = static_cast<double>(i);
  return (fi * max + (k - fi) * min) / k;
}

void Range::validate(const std::string& name) const {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, name + ": need at least 2 grid points");
  if (!std::isfinite(min) || !std::isfinite(max))
    throw Error(ErrorCode::InvalidArgument, name + ": range must be finite");
  if (!(min < max)) throw Error(ErrorCode::InvalidArgument, name + ": need min < max");
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

namespace {

// Counts finished cells per row and reports each row once it completes.
class RowTracker {
 public:
  RowTracker(std::size_t rows, std::size_t cols, const RowProgress& cb)
      : cols_(cols), rows_(rows), remaining_(rows), cb_(cb) {
    for (auto& r : remaining_) r = cols;
  }

  void cell_done(std::size_t index) {
    if (!cb_) return;
    std::lock_guard<std::mutex> lock(mutex_);
    if (--remaining_[index / cols_] == 0) cb_(++rows_done_, rows_);
  }

 private:
  std::size_t cols_;
  std::size_t rows_;
  std::vector<std::size_t> remaining_;
  std::size_t rows_done_ = 0;
  const RowProgress& cb_;
  std::mutex mutex_;
};

}  // namespace

void SweepConfig::validate() const {
  kappa_theta.validate("kappa_theta");
  kappa_p_theta.validate("kappa_ptheta");
  if (!std::isfinite(kappa_p_x)) throw Error(ErrorCode::InvalidArgument, "kappa_px must be finite");
  if (!std::isfinite(alpha) || alpha < 0.0)
    throw Error(ErrorCode::InvalidArgument, "alpha must be finite and non-negative");
  orbit.walls.validate();
}

std::size_t SweepResult::count_stable() const {
  return static_cast<std::size_t>(
      std::count_if(cells.begin(), cells.end(), [](const SweepCell& c) { return c.status == "ok" && c.stable; }));
}

std::size_t SweepResult::count_failed() const {
  return static_cast<std::size_t>(
      std::count_if(cells.begin(), cells.end(), [](const SweepCell& c) { return c.status != "ok"; }));
}

std::optional<SweepCell> SweepResult::best() const {
  std::optional<SweepCell> out;
  for (const SweepCell& c : cells)
    if (c.status == "ok" && (!out || c.rho_max < out->rho_max)) out = c;
  return out;
}

std::optional<SweepCell> SweepResult::worst() const {
  std::optional<SweepCell> out;
  for (const SweepCell& c : cells)
    if (c.status == "ok" && (!out || c.rho_max > out->rho_max)) out = c;
  return out;
}

SweepResult gain_sweep(const SweepConfig& cfg, const Params& base, const IntegratorConfig& integ,
                       const RowProgress& progress) {
  cfg.validate();
  integ.validate();
  Params p = base;
  p.alpha = cfg.alpha;
  p.validate();

  SweepResult out;
  out.open_loop = find_periodic_orbit(cfg.orbit.fixed_point, cfg.orbit.walls, integ, p, cfg.newton);
  out.n_rows = cfg.kappa_theta.n;
  out.n_cols = cfg.kappa_p_theta.n;
  out.cells.resize(out.n_rows * out.n_cols);

  RowTracker tracker(out.n_rows, out.n_cols, progress);
  parallel_for(out.cells.size(), cfg.workers, [&](std::size_t idx) {
    SweepCell& cell = out.cells[idx];
    cell.kappa_theta = cfg.kappa_theta.at(idx / out.n_cols);
    cell.kappa_p_theta = cfg.kappa_p_theta.at(idx % out.n_cols);
    const FeedbackGains gains{cell.kappa_theta, cell.kappa_p_theta, cfg.kappa_p_x};
    try {
      const WallSystem walls = feedback_walls(out.open_loop, gains, integ, p);
      const OrbitSpec closed = find_periodic_orbit(out.open_loop.fixed_point, walls, integ, p, cfg.newton);
      const MonodromyReport rep = analyze_orbit(closed, integ, p, cfg.monodromy);
      cell.fixed_point = closed.fixed_point;
      cell.rho_max = rep.spectral_radius_excl_trivial;
      cell.rho_max_raw = rep.spectral_radius;
      cell.stable = rep.stable;
    } catch (const Error& e) {
      cell.status = std::string(to_string(e.code()));
      cell.rho_max = std::nan("");
      cell.rho_max_raw = std::nan("");
      cell.stable = false;
    }
    tracker.cell_done(idx);
  });
  return out;
}

std::string_view to_string(SectionCoord c) {
  switch (c) {
    case SectionCoord::Theta:
      return "theta";
    case SectionCoord::PTheta:
      return "p_theta";
    case SectionCoord::PX:
      return "p_x";
  }
  return "unknown";
}

SectionCoord section_coord_from_string(std::string_view s) {
  if (s == "theta") return SectionCoord::Theta;
  if (s == "p_theta") return SectionCoord::PTheta;
  if (s == "p_x") return SectionCoord::PX;
  throw Error(ErrorCode::InvalidArgument, "unknown section coordinate '" + std::string(s) + "'");
}

void BasinConfig::validate() const {
  range1.validate("basin range1");
  range2.validate("basin range2");
  if (coord1 == coord2) throw Error(ErrorCode::InvalidArgument, "basin coordinates must differ");
  if (max_laps < 1) throw Error(ErrorCode::InvalidArgument, "max_laps must be >= 1");
  if (!(theta_bound > 0.0)) throw Error(ErrorCode::InvalidArgument, "theta_bound must be positive");
  if (state_distance_bound && !(*state_distance_bound > 0.0))
    throw Error(ErrorCode::InvalidArgument, "state_distance_bound must be positive");
  if (no_impact_timeout && !(*no_impact_timeout > 0.0))
    throw Error(ErrorCode::InvalidArgument, "no_impact_timeout must be positive");
}

double BasinConfig::resolved_distance_bound() const {
  if (state_distance_bound) return *state_distance_bound;
  const double radius = std::max({std::abs(range1.min), std::abs(range1.max), std::abs(range2.min),
                                  std::abs(range2.max)});
  return 10.0 * radius;
}

double BasinConfig::resolved_timeout(const OrbitSpec& orbit) const {
  return no_impact_timeout ? *no_impact_timeout : 10.0 * orbit.period;
}

std::size_t BasinResult::count_converged() const {
  return static_cast<std::size_t>(
      std::count_if(cells.begin(), cells.end(), [](const BasinCell& c) { return c.status == "converged"; }));
}

double BasinResult::converged_fraction() const {
  return cells.empty() ? 0.0 : static_cast<double>(count_converged()) / static_cast<double>(cells.size());
}

namespace {

double& coord_ref(State& s, SectionCoord c) {
  switch (c) {
    case SectionCoord::Theta:
      return s.theta;
    case SectionCoord::PTheta:
      return s.p_theta;
    case SectionCoord::PX:
      return s.p_x;
  }
  return s.theta;
}

}  // namespace

BasinCell basin_cell(const State& post, const WallSystem& walls, const OrbitSpec& orbit,
                     const BasinConfig& cfg, const IntegratorConfig& integ, const Params& p) {
  const auto impacts = orbit_impacts(orbit, integ, p);
  std::array<SectionState, 2> star{};
  for (const ImpactRecord& imp : impacts) star[imp.guard_index] = restrict_to_section(imp.pre);
  const double distance_bound = cfg.resolved_distance_bound();
  const auto guards = walls.guards();

  BasinCell cell;
  cell.status = "converged";
  if (std::abs(post.theta - star[0].theta) > cfg.theta_bound) {
    cell.status = "theta_bound";
    return cell;
  }

  IntegratorConfig chunk = integ;
  chunk.t_max = cfg.resolved_timeout(orbit);
  RunOptions opts;
  opts.stop_after_impacts = 1;
  opts.record_samples = false;
  opts.last_impact_time = 0.0;
  opts.just_fired = 0;

  State s = post;
  std::size_t last_wall = 0;
  bool seen_left = false;
  while (cell.laps < cfg.max_laps) {
    HybridTrajectory traj;
    try {
      traj = run_hybrid(s, guards, chunk, p, opts);
    } catch (const Error& e) {
      cell.status = std::string(to_string(e.code()));
      return cell;
    }
    if (traj.termination == Termination::HorizonReached) {
      cell.status = "timeout";
      return cell;
    }
    if (traj.termination != Termination::GuardSetExhausted) {
      cell.status = std::string(to_string(traj.termination));
      return cell;
    }
    const ImpactRecord& imp = traj.impacts.back();
    if (imp.guard_index == last_wall) {
      cell.status = "sequence";
      return cell;
    }
    const SectionState& ref = star[imp.guard_index];
    if (std::abs(imp.pre.theta - ref.theta) > cfg.theta_bound) {
      cell.status = "theta_bound";
      return cell;
    }
    if (max_abs_diff(restrict_to_section(imp.pre), ref) > distance_bound) {
      cell.status = "distance_bound";
      return cell;
    }
    if (imp.guard_index == 1) {
      if (seen_left) ++cell.laps;
      seen_left = true;
    }
    last_wall = imp.guard_index;
    s = imp.post;
    opts.t0 = imp.time;
    opts.last_impact_time = imp.time;
    opts.just_fired = imp.guard_index;
  }
  return cell;
}

BasinResult basin_map(const BasinConfig& cfg, const OrbitSpec& orbit, const FeedbackGains& gains,
                      const IntegratorConfig& integ, const Params& p, const RowProgress& progress) {
  cfg.validate();
  integ.validate();
  p.validate();
  const WallSystem walls = feedback_walls(orbit, gains, integ, p);
  OrbitSpec closed = orbit;
  closed.walls = walls;
  const State post_star = apply_reset(walls.right, embed(orbit.fixed_point, walls.x_star), p);

  BasinResult out;
  out.n_rows = cfg.range1.n;
  out.n_cols = cfg.range2.n;
  out.max_laps = cfg.max_laps;
  out.cells.resize(out.n_rows * out.n_cols);

  RowTracker tracker(out.n_rows, out.n_cols, progress);
  parallel_for(out.cells.size(), cfg.workers, [&](std::size_t idx) {
    const double d1 = cfg.range1.at(idx / out.n_cols);
    const double d2 = cfg.range2.at(idx % out.n_cols);
    State s = post_star;
    coord_ref(s, cfg.coord1) += d1;
    coord_ref(s, cfg.coord2) += d2;
    BasinCell cell = basin_cell(s, walls, closed, cfg, integ, p);
    cell.coord1 = d1;
    cell.coord2 = d2;
    out.cells[idx] = cell;
    tracker.cell_done(idx);
  });
  return out;
}

namespace {

ConnectionJumpCase first_impact(const State& s0, const GuardedReset& g, const IntegratorConfig& integ,
                                const Params& p) {
  RunOptions opts;
  opts.stop_after_impacts = 1;
  opts.record_samples = false;
  const HybridTrajectory traj = run_hybrid(s0, std::span<const GuardedReset>(&g, 1), integ, p, opts);
  if (traj.impacts.empty()) throw Error(ErrorCode::NoReturn, "demo trajectory never reached its guard");
  ConnectionJumpCase out;
  out.impact = traj.impacts.front();
  out.connection_jump = connection_jump(out.impact.pre, out.impact.post, p);
  return out;
}

}  // namespace

InteriorExteriorReport interior_vs_exterior_demo(const Params& p, const IntegratorConfig& integ) {
  p.validate();
  const State start{0.0, 0.0, 1.5, 1.0};
  InteriorExteriorReport rep;
  rep.interior = first_impact(
      start, {{GuardKind::InteriorAngle, 0.3, CrossingDirection::Increasing}, ResetLaw::interior_elastic()},
      integ, p);
  rep.exterior = first_impact(
      start, {{GuardKind::ExteriorWall, 0.5, CrossingDirection::Increasing}, ResetLaw::exterior_elastic()},
      integ, p);

  const State ref{0.0, 0.5, 0.0, 1.0};
  rep.exterior_reference_jump = connection_jump(ref, exterior_elastic_reset(ref, p), p);

  const State& pre = rep.exterior.impact.pre;
  const double v = symmetry_assignment_velocity(pre, connection(pre, p), p);
  rep.targeted_jump = connection_jump(pre, controlled_exterior_reset(pre, v, p), p);
  return rep;
}

}  // namespace cartimpact
