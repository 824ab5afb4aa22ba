#pragma once

// Gain sweep over feedback reset gains, basin-of-attraction lap counts, and
// the interior vs exterior connection-jump comparison.

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cartimpact/floquet.hpp"
#include "cartimpact/hybrid.hpp"
#include "cartimpact/integrate.hpp"
#include "cartimpact/newton.hpp"
#include "cartimpact/orbit.hpp"

namespace cartimpact {

/// Inclusive uniform grid axis with n >= 2 points.
struct Range {
  double min = 0.0;
  double max = 0.0;
  std::size_t n = 2;

  /// Endpoints are exact; symmetric ranges put exact 0 at the centre of odd grids.
  double at(std::size_t i) const;
  void validate(const std::string& name) const;
};

/// Run fn(i) for i in [0, n) on a pool of workers. fn must not share mutable
/// state across indices. The first exception thrown by any call is rethrown.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

/// Called once per completed grid row with (rows_done, rows_total).
using RowProgress = std::function<void(std::size_t, std::size_t)>;

struct SweepConfig {
  Range kappa_theta{-5.0, 5.0, 41};
  Range kappa_p_theta{-5.0, 5.0, 41};
  double kappa_p_x = 0.0;
  double alpha = 1.0;
  OrbitSpec orbit;  ///< open-loop orbit; re-located at this alpha before the sweep
  std::size_t workers = 1;
  NewtonOptions newton;
  MonodromyOptions monodromy;

  void validate() const;
};

struct SweepCell {
  double kappa_theta = 0.0;
  double kappa_p_theta = 0.0;
  double rho_max = 0.0;      ///< largest nontrivial multiplier modulus
  double rho_max_raw = 0.0;  ///< largest modulus including the trivial one
  bool stable = false;
  std::string status = "ok";  ///< "ok" or the error code of the failure
  SectionState fixed_point;
};

struct SweepResult {
  OrbitSpec open_loop;           ///< the orbit after re-location at cfg.alpha
  std::vector<SweepCell> cells;  ///< row-major, kappa_theta is the row index
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;

  std::size_t count_stable() const;
  std::size_t count_failed() const;
  /// Smallest rho_max over the ok cells; nullopt when all cells failed.
  std::optional<SweepCell> best() const;
  std::optional<SweepCell> worst() const;
};

/// Throws InvalidArgument on a bad config and propagates the open-loop
/// re-location error; per-cell failures are recorded in the cell status.
SweepResult gain_sweep(const SweepConfig& cfg, const Params& base, const IntegratorConfig& integ,
                       const RowProgress& progress = {});

enum class SectionCoord { Theta, PTheta, PX };
std::string_view to_string(SectionCoord c);
SectionCoord section_coord_from_string(std::string_view s);

struct BasinConfig {
  SectionCoord coord1 = SectionCoord::Theta;
  SectionCoord coord2 = SectionCoord::PTheta;
  Range range1{-0.05, 0.05, 41};  ///< offsets from the orbit's post-impact section state
  Range range2{-0.05, 0.05, 41};
  std::size_t max_laps = 50;
  double theta_bound = 1.5707963267948966;
  /// Section-state distance bound; default 10x the grid radius.
  std::optional<double> state_distance_bound;
  /// Longest allowed flight without an impact; default 10x the orbit period.
  std::optional<double> no_impact_timeout;
  std::size_t workers = 1;

  void validate() const;
  double resolved_distance_bound() const;
  double resolved_timeout(const OrbitSpec& orbit) const;
};

struct BasinCell {
  double coord1 = 0.0;
  double coord2 = 0.0;
  std::size_t laps = 0;
  /// "converged", "theta_bound", "distance_bound", "timeout", "sequence",
  /// or an integrator failure ("zeno", "diverged", error code name).
  std::string status;
};

struct BasinResult {
  std::vector<BasinCell> cells;  ///< row-major, coord1 is the row index
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::size_t max_laps = 0;

  std::size_t count_converged() const;
  double converged_fraction() const;
};

/// Lap count for a post-impact state on the right wall of a closed-loop system.
BasinCell basin_cell(const State& post, const WallSystem& walls, const OrbitSpec& orbit,
                     const BasinConfig& cfg, const IntegratorConfig& integ, const Params& p);

/// Closed-loop walls are feedback_walls(orbit, gains). Each grid point
/// perturbs the orbit's right-wall post-impact state in coord1/coord2.
BasinResult basin_map(const BasinConfig& cfg, const OrbitSpec& orbit, const FeedbackGains& gains,
                      const IntegratorConfig& integ, const Params& p, const RowProgress& progress = {});

struct ConnectionJumpCase {
  ImpactRecord impact;
  double connection_jump = 0.0;
};

struct InteriorExteriorReport {
  ConnectionJumpCase interior;  ///< simulated impact on the angle guard
  ConnectionJumpCase exterior;  ///< simulated impact on the elastic wall
  /// Elastic wall at theta = 0, p_theta = 0, p_x = 1; exact value -2/(M+m).
  double exterior_reference_jump = 0.0;
  /// Moving wall with v* targeting the pre-impact connection.
  double targeted_jump = 0.0;
};

/// Both simulations start from the same state; the interior guard sits at
/// theta = 0.3 rad, the wall at x = 0.5.
InteriorExteriorReport interior_vs_exterior_demo(const Params& p, const IntegratorConfig& integ);

}  // namespace cartimpact
